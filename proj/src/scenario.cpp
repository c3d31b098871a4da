#include "proshape/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace proshape {

using json = nlohmann::json;

ScenarioError::ScenarioError(std::string message, std::string path,
                             std::optional<std::size_t> line,
                             std::optional<std::size_t> column)
    : std::runtime_error(std::move(message)),
      path_(std::move(path)),
      line_(line),
      column_(column) {}

std::uint64_t fnv1a(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) { return fmt::format("{:016x}", value); }

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : fmt::format("{}.{}", path, key);
}

std::string index(const std::string& path, std::size_t i) {
  return fmt::format("{}[{}]", path, i);
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioError(fmt::format("{}: {}", path.empty() ? "<root>" : path, what),
                      path);
}

void allow_keys(const json& obj, const std::string& path,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      fail(join(path, item.key()), "unknown key");
    }
  }
}

const json& require(const json& obj, const std::string& path,
                    std::string_view key) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end()) fail(join(path, key), "missing required key");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::uint64_t count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    fail(path, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(number(j[i], index(path, i)));
  }
  return out;
}

std::vector<double> parse_sizes(const json& j, const std::string& path,
                                std::uint64_t seed) {
  allow_keys(j, path, {"sizes", "uniform_int"});
  if (j.contains("sizes") == j.contains("uniform_int")) {
    fail(path, "give exactly one of 'sizes' or 'uniform_int'");
  }
  if (j.contains("sizes")) return numbers(j["sizes"], join(path, "sizes"));
  const std::string sub = join(path, "uniform_int");
  const json& u = j["uniform_int"];
  allow_keys(u, sub, {"lo", "hi", "items"});
  const auto lo = count(require(u, sub, "lo"), join(sub, "lo"));
  const auto hi = count(require(u, sub, "hi"), join(sub, "hi"));
  const auto items = count(require(u, sub, "items"), join(sub, "items"));
  if (hi < lo) fail(sub, "hi must be >= lo");
  return random_integer_sizes(items, static_cast<int>(lo),
                              static_cast<int>(hi), CounterRng(seed));
}

CostModel parse_cost(const json& j, const std::string& path) {
  allow_keys(j, path, {"kind", "mu", "coeffs", "probe_max"});
  const json& kind = require(j, path, "kind");
  if (!kind.is_string()) fail(join(path, "kind"), "expected a string");
  const auto name = kind.get<std::string>();
  try {
    if (name == "quadratic") {
      if (j.contains("mu") || j.contains("coeffs")) {
        fail(path, "quadratic cost takes no parameters");
      }
      return CostModel::quadratic();
    }
    if (name == "outage") {
      return CostModel::outage(number(require(j, path, "mu"), join(path, "mu")));
    }
    if (name == "polynomial") {
      const double probe = j.contains("probe_max")
                               ? number(j["probe_max"], join(path, "probe_max"))
                               : 100.0;
      return CostModel::polynomial(
          numbers(require(j, path, "coeffs"), join(path, "coeffs")), probe);
    }
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  fail(join(path, "kind"),
       fmt::format("unknown cost kind '{}' (quadratic, outage, polynomial)",
                   name));
}

DemandProfile parse_rows(const json& j, const std::string& path,
                         std::size_t items) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of users");
  const std::size_t users = j.size();
  std::size_t slots = 0;
  for (std::size_t n = 0; n < users; ++n) {
    if (!j[n].is_array() || j[n].empty()) {
      fail(index(path, n), "expected a non-empty array of slot rows");
    }
    if (n == 0) slots = j[n].size();
    if (j[n].size() != slots) {
      fail(index(path, n), fmt::format("has {} slots, user 0 has {}",
                                       j[n].size(), slots));
    }
  }
  DemandProfile profile(users, slots, items);
  for (std::size_t n = 0; n < users; ++n) {
    for (std::size_t t = 0; t < slots; ++t) {
      const std::string at = index(index(path, n), t);
      const json& row = j[n][t];
      std::vector<double> p;
      std::optional<double> q;
      if (row.is_object()) {
        allow_keys(row, at, {"p", "q"});
        p = numbers(require(row, at, "p"), join(at, "p"));
        if (row.contains("q")) q = number(row["q"], join(at, "q"));
      } else {
        p = numbers(row, at);
      }
      if (p.size() != items) {
        fail(at, fmt::format("has {} probabilities, catalog has {} items",
                             p.size(), items));
      }
      const double silence =
          q ? *q : 1.0 - std::accumulate(p.begin(), p.end(), 0.0);
      profile.set_row(n, t, p, silence);
    }
  }
  return profile;
}

DemandProfile parse_generator(const json& j, const std::string& path,
                              std::size_t items,
                              std::optional<std::size_t> slots) {
  allow_keys(j, path, {"zipf"});
  const std::string sub = join(path, "zipf");
  const json& z = require(j, path, "zipf");
  allow_keys(z, sub, {"users", "power", "activity"});
  const auto users = count(require(z, sub, "users"), join(sub, "users"));
  const double power = number(require(z, sub, "power"), join(sub, "power"));
  const json& act = require(z, sub, "activity");
  std::vector<double> activity =
      act.is_array() ? numbers(act, join(sub, "activity"))
                     : std::vector<double>{number(act, join(sub, "activity"))};
  if (!slots) slots = activity.size();
  if (activity.size() == 1) activity.resize(*slots, activity[0]);
  if (activity.size() != *slots) {
    fail(join(sub, "activity"), fmt::format("has {} entries for {} slots",
                                            activity.size(), *slots));
  }
  DemandProfile profile(users, *slots, items);
  for (std::size_t t = 0; t < *slots; ++t) {
    std::vector<double> row;
    try {
      row = zipf_profile(items, power, activity[t]);
    } catch (const std::invalid_argument& e) {
      fail(sub, e.what());
    }
    for (std::size_t n = 0; n < users; ++n) {
      profile.set_row(n, t, row, 1.0 - activity[t]);
    }
  }
  return profile;
}

EvalConfig parse_eval(const json& j, const std::string& path) {
  allow_keys(j, path, {"engine", "samples"});
  EvalConfig cfg;
  if (j.contains("engine")) {
    if (!j["engine"].is_string()) fail(join(path, "engine"), "expected a string");
    try {
      cfg.engine = parse_engine(j["engine"].get<std::string>());
    } catch (const std::invalid_argument& e) {
      fail(join(path, "engine"), e.what());
    }
  }
  if (j.contains("samples")) {
    cfg.samples = count(j["samples"], join(path, "samples"));
    if (cfg.samples == 0) fail(join(path, "samples"), "must be positive");
  }
  return cfg;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text,
                                                std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    throw ScenarioError(
        fmt::format("syntax error at line {}, column {}: {}", line, column,
                    e.what()),
        "", line, column);
  }

  allow_keys(doc, "",
             {"name", "seed", "catalog", "slots", "profile", "generator",
              "cost", "alpha", "eval", "ratings"});
  std::string name;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) fail("name", "expected a string");
    name = doc["name"].get<std::string>();
  }
  const std::uint64_t seed = doc.contains("seed") ? count(doc["seed"], "seed") : 0;

  std::vector<double> sizes =
      parse_sizes(require(doc, "", "catalog"), "catalog", seed);
  std::optional<ItemCatalog> catalog;
  try {
    catalog.emplace(std::move(sizes));
  } catch (const std::invalid_argument& e) {
    fail("catalog", e.what());
  }

  std::optional<std::size_t> slots;
  if (doc.contains("slots")) {
    slots = count(doc["slots"], "slots");
    if (*slots == 0) fail("slots", "must be >= 1");
  }
  if (doc.contains("profile") == doc.contains("generator")) {
    fail("", "give exactly one of 'profile' or 'generator'");
  }
  DemandProfile profile =
      doc.contains("profile")
          ? parse_rows(doc["profile"], "profile", catalog->size())
          : parse_generator(doc["generator"], "generator", catalog->size(),
                            slots);
  if (slots && profile.slots() != *slots) {
    fail("slots", fmt::format("is {} but the profile has {} slots", *slots,
                              profile.slots()));
  }
  std::vector<std::string> warnings;
  try {
    profile = normalize_profile(profile, &warnings);
  } catch (const std::invalid_argument& e) {
    fail(doc.contains("profile") ? "profile" : "generator", e.what());
  }

  CostModel cost = parse_cost(require(doc, "", "cost"), "cost");

  std::vector<double> alpha{kDefaultShapeAlpha};
  if (doc.contains("alpha")) {
    alpha = doc["alpha"].is_array()
                ? numbers(doc["alpha"], "alpha")
                : std::vector<double>{number(doc["alpha"], "alpha")};
    if (alpha.size() != 1 && alpha.size() != profile.users()) {
      fail("alpha", fmt::format("needs 1 or {} entries", profile.users()));
    }
    for (double a : alpha) {
      if (!(a >= 0.0)) fail("alpha", "entries must be >= 0");
    }
  }

  EvalConfig eval = doc.contains("eval") ? parse_eval(doc["eval"], "eval")
                                         : EvalConfig{};
  eval.seed = seed;
  try {
    check_engine(eval, profile.users(), profile.items(), cost);
  } catch (const UnsupportedEngine& e) {
    fail("eval.engine", e.what());
  }

  std::vector<std::vector<double>> ratings;
  if (doc.contains("ratings")) {
    const json& r = doc["ratings"];
    if (!r.is_array() || r.size() != profile.users()) {
      fail("ratings", fmt::format("expected {} rating vectors", profile.users()));
    }
    for (std::size_t n = 0; n < r.size(); ++n) {
      ratings.push_back(numbers(r[n], index("ratings", n)));
      if (ratings.back().size() != profile.items()) {
        fail(index("ratings", n), "length differs from the catalog");
      }
    }
  }

  return Scenario{std::move(name),  std::move(*catalog), std::move(profile),
                  std::move(cost),  std::move(alpha),    eval,
                  seed,             std::move(ratings),  std::move(warnings),
                  hex64(fnv1a(doc.dump()))};
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ScenarioError(fmt::format("cannot open scenario '{}'", path.string()),
                        "");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

}  // namespace proshape
