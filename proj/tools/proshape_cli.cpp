// proshape: command-line front end for proactive download optimization,
// demand shaping and rating recommendation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "proshape/demand_shape.hpp"
#include "proshape/experiments.hpp"
#include "proshape/proactive_opt.hpp"
#include "proshape/recommender.hpp"
#include "proshape/report.hpp"
#include "proshape/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace proshape;

namespace {

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kBadScenario = 3,
  kUnsupported = 4,
  kInfeasible = 5,
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::optional<std::string> engine;
};

struct Options {
  std::string scenario;
  Overrides overrides;
  double tol = 1e-8;
  std::size_t max_iters = 5000;
  std::optional<double> alpha;
  std::string out;
  std::string trace;
  std::string family = "zipf-cycle";
  std::vector<std::size_t> ladder{50, 100, 200};
  std::uint64_t family_seed = 7;
  std::string profile;
  std::string ratings;
  std::string target;
};

void print(const ordered_json& j) { std::cout << j.dump(2) << '\n'; }

int report_error(std::string_view kind, const std::string& message,
                 ordered_json extra, int code) {
  ordered_json err;
  err["kind"] = kind;
  err["message"] = message;
  for (auto& [k, v] : extra.items()) err[k] = v;
  print(ordered_json{{"error", err}});
  return code;
}

Scenario load(const Options& opt) {
  Scenario s = load_scenario(opt.scenario);
  if (opt.overrides.seed) {
    s.seed = *opt.overrides.seed;
    s.eval.seed = *opt.overrides.seed;
  }
  if (opt.overrides.samples) s.eval.samples = *opt.overrides.samples;
  if (opt.overrides.engine) s.eval.engine = parse_engine(*opt.overrides.engine);
  check_engine(s.eval, s.profile.users(), s.profile.items(), s.cost);
  return s;
}

RunReport start_report(const std::string& command, const Scenario& s) {
  RunReport r;
  r.command = command;
  r.scenario_hash = s.hash;
  r.metrics["engine"] = to_string(s.eval.engine);
  if (s.eval.engine == Engine::monte_carlo) {
    r.metrics["samples"] = s.eval.samples;
    r.metrics["seed"] = s.eval.seed;
  }
  if (!s.warnings.empty()) r.metrics["warnings"] = s.warnings;
  return r;
}

void emit(RunReport& report, const std::string& csv_path, const CsvTable& t) {
  if (!csv_path.empty()) report.files.push_back(write_output(csv_path, t.str()));
}

void finish(const RunReport& report, const std::string& summary_path) {
  const ordered_json j = report.to_json();
  if (!summary_path.empty()) write_output(summary_path, j.dump(2) + "\n");
  print(j);
}

std::string summary_beside(const std::string& csv) {
  if (csv.empty()) return {};
  fs::path p(csv);
  p.replace_extension(".json");
  return p.string();
}

SolveOptions solve_options(const Options& opt) {
  SolveOptions so;
  so.tol = opt.tol;
  so.max_iters = opt.max_iters;
  return so;
}

int run_simulate(const Options& opt) {
  const Scenario s = load(opt);
  const auto alloc = ProactiveAllocation::zeros_like(s.profile);
  const auto slots = slot_costs(s.catalog, s.profile, alloc, s.cost, s.eval);
  const Estimate total =
      expected_cycle_cost(s.catalog, s.profile, alloc, s.cost, s.eval);
  RunReport r = start_report("simulate", s);
  r.metrics["c_nonproactive"] = total.value;
  r.metrics["stderr"] = total.std_error;
  emit(r, opt.out, slot_cost_table(slots, s.eval.engine));
  finish(r, summary_beside(opt.out));
  return kOk;
}

int run_optimize(const Options& opt) {
  const Scenario s = load(opt);
  const SolveOptions so = solve_options(opt);
  const Estimate base = nonproactive_cost(s.catalog, s.profile, s.cost, s.eval);
  const SolveResult sol = solve_proactive(s.catalog, s.profile, s.cost, s.eval, so);
  RunReport r = start_report("optimize", s);
  r.metrics["c_nonproactive"] = base.value;
  r.metrics["c_proactive"] = sol.cost.value;
  r.metrics["delta_c"] = base.value - sol.cost.value;
  r.metrics["stderr"] = std::hypot(base.std_error, sol.cost.std_error);
  r.metrics["converged"] = sol.converged;
  r.metrics["iterations"] = sol.iterations;
  r.metrics["residual"] = sol.residual;
  if (s.eval.engine != Engine::monte_carlo) {
    const auto sets = active_sets(s.catalog, s.profile, s.cost, s.eval);
    const auto policy = policy_a(s.catalog, s.profile, s.cost, s.eval, sets);
    const auto bounds = reduction_bounds(s.catalog, s.profile, s.cost, s.eval, so);
    r.metrics["policy_a_cost"] = bounds.policy_a_cost;
    r.metrics["lower_bound"] = bounds.lower;
    r.metrics["upper_bound"] = bounds.upper;
    r.metrics["x_tilde"] = policy.x_tilde;
  }
  emit(r, opt.out, allocation_table(sol.x));
  finish(r, summary_beside(opt.out));
  return sol.converged ? kOk : kFailure;
}

int run_shape(const Options& opt) {
  const Scenario s = load(opt);
  ShapeOptions so;
  so.tol_outer = opt.tol;
  so.inner.tol = std::min(opt.tol, 1e-8);
  so.inner.max_iters = opt.max_iters;
  const std::vector<double> alpha =
      opt.alpha ? std::vector<double>{*opt.alpha} : s.alpha;
  const ShapingResult res =
      shape_demand(s.catalog, s.profile, s.cost, s.eval, alpha, so);
  RunReport r = start_report("shape", s);
  r.metrics["alpha"] = alpha;
  r.metrics["f0_initial"] = res.trace.iterates.front().f0;
  r.metrics["f0_final"] = res.trace.iterates.back().f0;
  r.metrics["iterations"] = res.trace.iterates.size() - 1;
  r.metrics["converged"] = res.trace.converged;
  const auto report = boundary_check(res.p, make_regions(s.profile, alpha));
  r.metrics["boundary_residuals"] = report.residual;
  r.metrics["ball_interior"] = report.hypothesis;
  emit(r, opt.trace, trace_table(res.trace));
  emit(r, opt.out, profile_table(s.profile, res.p));
  finish(r, summary_beside(opt.out));
  return kOk;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError(fmt::format("cannot open '{}'", path), "");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(fmt::format("{}: {}", path, e.what()), "");
  }
}

std::vector<double> as_numbers(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw ScenarioError(path + ": expected an array", path);
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ScenarioError(path + ": expected numbers", path);
    out.push_back(v.get<double>());
  }
  return out;
}

int run_recommend(const Options& opt) {
  const auto profile = read_json(opt.profile);
  const auto ratings = read_json(opt.ratings);
  if (!profile.is_array() || !ratings.is_array() ||
      profile.size() != ratings.size()) {
    throw ScenarioError(
        "profile and ratings must be arrays with one entry per row", "");
  }
  CsvTable table{{"row", "item", "pi_target", "v"}, {}};
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const std::string at = fmt::format("profile[{}]", i);
    const auto& row = profile[i];
    if (!row.is_object() || !row.contains("p")) {
      throw ScenarioError(at + ": expected {\"p\": [...], \"q\": number}", at);
    }
    for (const auto& item : row.items()) {
      if (item.key() != "p" && item.key() != "q") {
        throw ScenarioError(at + "." + item.key() + ": unknown key",
                            at + "." + item.key());
      }
    }
    const auto p = as_numbers(row["p"], at + ".p");
    double q = 1.0;
    for (double v : p) q -= v;
    if (row.contains("q")) q = row["q"].get<double>();
    const auto r = as_numbers(ratings[i], fmt::format("ratings[{}]", i));
    const RatingResult res = solve_rating(p, q, r);
    for (std::size_t m = 0; m < p.size(); ++m) {
      const double pi = q < 1.0 ? p[m] / (1.0 - q) : 0.0;
      table.rows.push_back({std::to_string(i), std::to_string(m + 1),
                            format_number(pi), format_number(res.v[m])});
    }
    rows.push_back({{"scale", res.scale},
                    {"clamped", res.clamped},
                    {"unconstrained", res.unconstrained}});
  }
  RunReport r;
  r.command = "recommend";
  r.scenario_hash = hex64(fnv1a(profile.dump() + ratings.dump()));
  r.metrics["rows"] = rows;
  emit(r, opt.out, table);
  finish(r, summary_beside(opt.out));
  return kOk;
}

int run_scale(const Options& opt) {
  if (opt.family != "zipf-cycle") {
    throw std::invalid_argument(
        fmt::format("unknown family '{}' (available: zipf-cycle)", opt.family));
  }
  EvalConfig cfg;
  cfg.engine = opt.overrides.engine ? parse_engine(*opt.overrides.engine)
                                    : Engine::analytic_quadratic;
  cfg.seed = opt.family_seed;
  if (opt.overrides.samples) cfg.samples = *opt.overrides.samples;
  const auto curve =
      scaling_curve(zipf_cycle_family(opt.family_seed), opt.ladder,
                    CostModel::quadratic(), cfg, solve_options(opt));
  RunReport r;
  r.command = "scale";
  r.scenario_hash = hex64(fnv1a(fmt::format("{}:{}", opt.family, opt.family_seed)));
  r.metrics["family"] = opt.family;
  r.metrics["seed"] = opt.family_seed;
  r.metrics["engine"] = to_string(cfg.engine);
  r.metrics["exponent"] = curve.exponent;
  r.metrics["ratio_last"] = curve.points.back().ratio;
  emit(r, opt.out, scaling_table(curve));
  finish(r, summary_beside(opt.out));
  return kOk;
}

int run_reproduce(const Options& opt) {
  const fs::path dir = opt.out.empty() ? fs::path("results") : fs::path(opt.out);
  RunReport r;
  r.command = "reproduce-paper " + opt.target;
  if (opt.target == "two-user-quadratic" || opt.target == "two-user-outage") {
    const CostKind kind = opt.target == "two-user-quadratic"
                              ? CostKind::quadratic
                              : CostKind::outage;
    ShapeOptions so;
    so.tol_outer = opt.tol;
    so.inner.max_iters = opt.max_iters;
    const double alpha = opt.alpha.value_or(kDefaultShapeAlpha);
    const TwoUserReport rep = reproduce_two_user(kind, alpha, so);
    r.scenario_hash =
        hex64(fnv1a(fmt::format("{}:{}", opt.target, format_number(alpha))));
    r.metrics["cost"] = two_user_cost(kind).describe();
    r.metrics["alpha"] = alpha;
    r.metrics["sca_converged"] = rep.trace.converged;
    ordered_json users = ordered_json::array();
    for (const auto& u : rep.users) {
      users.push_back({{"user", u.user},
                       {"distance", u.distance},
                       {"target_radius", u.target},
                       {"ball_interior", u.interior},
                       {"rating_scale", u.rating.scale}});
    }
    r.metrics["users"] = users;
    r.files.push_back(write_output(dir / "sweep.csv", sweep_table(rep.sweep).str()));
    r.files.push_back(write_output(dir / "trace.csv", trace_table(rep.trace).str()));
    r.files.push_back(
        write_output(dir / "table.csv", shaped_users_table(rep.users).str()));
  } else if (opt.target == "scaling") {
    const auto curve = reproduce_scaling(opt.family_seed, {25, 50, 100, 200},
                                         solve_options(opt));
    r.scenario_hash = hex64(fnv1a(fmt::format("scaling:{}", opt.family_seed)));
    r.metrics["seed"] = opt.family_seed;
    r.metrics["exponent"] = curve.exponent;
    r.metrics["ratio_at_200"] = curve.points.back().ratio;
    r.files.push_back(
        write_output(dir / "scaling.csv", scaling_table(curve).str()));
  } else {
    throw CLI::ValidationError("target", "unknown reproduction " + opt.target);
  }
  finish(r, (dir / "summary.json").string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proactive download optimization and demand shaping"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  Options opt;

  auto add_scenario = [&](CLI::App* sub) {
    sub->add_option("--scenario", opt.scenario, "Scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
  };
  auto add_eval = [&](CLI::App* sub) {
    sub->add_option("--seed", opt.overrides.seed, "RNG seed override");
    sub->add_option("--samples", opt.overrides.samples,
                    "Monte Carlo sample count")
        ->check(CLI::PositiveNumber);
    sub->add_option("--engine", opt.overrides.engine,
                    "enumerate | analytic_quadratic | monte_carlo");
  };
  auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--tol", opt.tol, "Stationarity tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-iters", opt.max_iters, "Iteration cap")
        ->check(CLI::PositiveNumber);
  };

  auto* simulate = app.add_subcommand("simulate", "Expected cost without prefetching");
  add_scenario(simulate);
  add_eval(simulate);
  simulate->add_option("--out", opt.out, "Per-slot CSV");

  auto* optimize = app.add_subcommand("optimize", "Optimal proactive downloads");
  add_scenario(optimize);
  add_eval(optimize);
  add_solver(optimize);
  optimize->add_option("--out", opt.out, "Allocation CSV");

  auto* shape = app.add_subcommand("shape", "Joint demand shaping and prefetching");
  add_scenario(shape);
  add_eval(shape);
  add_solver(shape);
  shape->add_option("--alpha", opt.alpha, "Entropy ball scale")
      ->check(CLI::NonNegativeNumber);
  shape->add_option("--trace", opt.trace, "Trace CSV (iter, f0, residual)");
  shape->add_option("--out", opt.out, "Shaped profile CSV");

  auto* recommend = app.add_subcommand("recommend", "Ratings realizing a profile");
  recommend->add_option("--profile", opt.profile, "Target profile rows JSON")
      ->required()
      ->check(CLI::ExistingFile);
  recommend->add_option("--ratings", opt.ratings, "Original ratings JSON")
      ->required()
      ->check(CLI::ExistingFile);
  recommend->add_option("--out", opt.out, "Ratings CSV");

  auto* scale = app.add_subcommand("scale", "Cost reduction against user count");
  scale->add_option("--family", opt.family, "Instance family (zipf-cycle)");
  scale->add_option("--N", opt.ladder, "User counts, comma separated")
      ->delimiter(',');
  scale->add_option("--seed", opt.family_seed, "Family seed");
  scale->add_option("--samples", opt.overrides.samples,
                    "Monte Carlo sample count")
      ->check(CLI::PositiveNumber);
  scale->add_option("--engine", opt.overrides.engine,
                    "analytic_quadratic | monte_carlo");
  add_solver(scale);
  scale->add_option("--out", opt.out, "Scaling CSV");

  auto* reproduce = app.add_subcommand("reproduce-paper",
                                       "Regenerate the published experiments");
  reproduce->add_option("target", opt.target,
                        "two-user-quadratic | two-user-outage | scaling")
      ->required()
      ->check(CLI::IsMember(
          {"two-user-quadratic", "two-user-outage", "scaling"}));
  reproduce->add_option("--seed", opt.family_seed, "Size seed for scaling");
  reproduce->add_option("--alpha", opt.alpha, "Entropy ball scale")
      ->check(CLI::NonNegativeNumber);
  add_solver(reproduce);
  reproduce->add_option("--out", opt.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("argument", e.what(), ordered_json::object(), kUsage);
  }

  try {
    if (*simulate) return run_simulate(opt);
    if (*optimize) return run_optimize(opt);
    if (*shape) return run_shape(opt);
    if (*recommend) return run_recommend(opt);
    if (*scale) return run_scale(opt);
    if (*reproduce) return run_reproduce(opt);
  } catch (const ScenarioError& e) {
    ordered_json extra{{"path", e.path()}};
    if (e.line()) extra["line"] = *e.line();
    if (e.column()) extra["column"] = *e.column();
    return report_error("scenario", e.what(), extra, kBadScenario);
  } catch (const UnsupportedEngine& e) {
    return report_error("engine", e.what(), ordered_json::object(), kUnsupported);
  } catch (const DomainError& e) {
    return report_error("domain", e.what(), {{"load", e.load()}}, kInfeasible);
  } catch (const CLI::Error& e) {
    return report_error("argument", e.what(), ordered_json::object(), kUsage);
  } catch (const std::exception& e) {
    return report_error("failure", e.what(), ordered_json::object(), kFailure);
  }
  return kUsage;
}
