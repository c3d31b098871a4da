#include "proshape/slot_expectation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace proshape {
namespace {

struct RunningMean {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  [[nodiscard]] Estimate estimate() const {
    if (count < 2) return {mean, 0.0};
    const double var = m2 / static_cast<double>(count - 1);
    return {mean, std::sqrt(var / static_cast<double>(count))};
  }
};

double apply(const CostModel& cost, Moment moment, double load) {
  return moment == Moment::cost ? cost.cost(load) : cost.marginal(load);
}

// Conditioning on an unreachable request may leave the cost domain; that
// branch never happens, so it reads as +inf instead of aborting.
double apply_given(const SlotLoad& load, std::size_t n, std::size_t m,
                   const CostModel& cost, Moment moment, double y) {
  if (load.p(n, m) == 0.0 && !cost.in_domain(y)) {
    return std::numeric_limits<double>::infinity();
  }
  return apply(cost, moment, y);
}

struct Branch {
  double weight;
  double value;
};

// Reachable (probability > 0) outcomes of each user, silence included.
std::vector<std::vector<Branch>> branches(const SlotLoad& load) {
  std::vector<std::vector<Branch>> out(load.users);
  for (std::size_t n = 0; n < load.users; ++n) {
    if (load.silence[n] > 0.0) out[n].push_back({load.silence[n], 0.0});
    for (std::size_t m = 0; m < load.items; ++m) {
      if (load.p(n, m) > 0.0) out[n].push_back({load.p(n, m), load.v(n, m)});
    }
  }
  return out;
}

// Visits every joint outcome of all users except `skip`.
template <typename Visit>
void enumerate_outcomes(const std::vector<std::vector<Branch>>& br,
                        std::size_t skip, double additive, Visit&& visit) {
  const std::size_t users = br.size();
  auto recurse = [&](auto&& self, std::size_t n, double weight,
                     double sum) -> void {
    if (n == users) {
      visit(weight, sum);
      return;
    }
    if (n == skip) {
      self(self, n + 1, weight, sum);
      return;
    }
    for (const Branch& b : br[n]) {
      self(self, n + 1, weight * b.weight, sum + b.value);
    }
  };
  recurse(recurse, 0, 1.0, additive);
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments user_moments(const SlotLoad& load, std::size_t n) {
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t m = 0; m < load.items; ++m) {
    mean += load.p(n, m) * load.v(n, m);
    second += load.p(n, m) * load.v(n, m) * load.v(n, m);
  }
  return {mean, std::max(0.0, second - mean * mean)};
}

double quadratic_moment(const std::array<double, 3>& c, Moment moment,
                        double mean, double var) {
  if (moment == Moment::cost) {
    return c[0] + c[1] * mean + c[2] * (var + mean * mean);
  }
  return c[1] + 2.0 * c[2] * mean;
}

double draw_user_value(const SlotLoad& load, std::size_t n,
                       const CounterRng& rng, std::uint64_t k) {
  const std::span<const double> row(load.prob.data() + n * load.items,
                                    load.items);
  const double u = rng.uniform(static_cast<std::uint32_t>(n),
                               static_cast<std::uint32_t>(load.slot), k);
  const std::size_t choice = pick_choice(row, u);
  return choice == 0 ? 0.0 : load.v(n, choice - 1);
}

}  // namespace

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::enumerate: return "enumerate";
    case Engine::analytic_quadratic: return "analytic_quadratic";
    case Engine::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

Engine parse_engine(const std::string& name) {
  if (name == "enumerate") return Engine::enumerate;
  if (name == "analytic_quadratic" || name == "analytic") {
    return Engine::analytic_quadratic;
  }
  if (name == "monte_carlo" || name == "mc") return Engine::monte_carlo;
  throw std::invalid_argument(fmt::format("unknown engine '{}'", name));
}

void check_engine(const EvalConfig& cfg, std::size_t users, std::size_t items,
                  const CostModel& cost) {
  switch (cfg.engine) {
    case Engine::enumerate: {
      const double outcomes =
          std::pow(static_cast<double>(items + 1), static_cast<double>(users));
      if (outcomes > kMaxEnumeratedOutcomes) {
        throw UnsupportedEngine(fmt::format(
            "enumerate engine needs (M+1)^N <= 1e7, got ({}+1)^{}", items,
            users));
      }
      return;
    }
    case Engine::analytic_quadratic:
      if (!cost.quadratic_form()) {
        throw UnsupportedEngine(fmt::format(
            "analytic_quadratic engine cannot evaluate {} cost",
            cost.describe()));
      }
      return;
    case Engine::monte_carlo:
      if (cfg.samples < 2) {
        throw UnsupportedEngine("monte_carlo engine needs at least 2 samples");
      }
      return;
  }
}

SlotLoad plain_slot_load(const ItemCatalog& catalog,
                         const DemandProfile& profile, std::size_t t) {
  SlotLoad load;
  load.slot = profile.wrap(static_cast<std::ptrdiff_t>(t));
  load.users = profile.users();
  load.items = profile.items();
  load.prob.resize(load.users * load.items);
  load.value.resize(load.users * load.items);
  load.silence.resize(load.users);
  for (std::size_t n = 0; n < load.users; ++n) {
    const auto row = profile.row(n, load.slot);
    for (std::size_t m = 0; m < load.items; ++m) {
      load.prob[n * load.items + m] = row[m];
      load.value[n * load.items + m] = catalog[m];
    }
    load.silence[n] = profile.silence(n, load.slot);
  }
  return load;
}

Estimate expect(const SlotLoad& load, const CostModel& cost, Moment moment,
                const EvalConfig& cfg) {
  switch (cfg.engine) {
    case Engine::enumerate: {
      double acc = 0.0;
      enumerate_outcomes(branches(load), load.users, load.additive,
                         [&](double w, double y) {
                           acc += w * apply(cost, moment, y);
                         });
      return {acc, 0.0};
    }
    case Engine::analytic_quadratic: {
      const auto c = cost.quadratic_form();
      if (!c) throw UnsupportedEngine("analytic_quadratic needs degree <= 2");
      Moments total{load.additive, 0.0};
      for (std::size_t n = 0; n < load.users; ++n) {
        const Moments u = user_moments(load, n);
        total.mean += u.mean;
        total.var += u.var;
      }
      return {quadratic_moment(*c, moment, total.mean, total.var), 0.0};
    }
    case Engine::monte_carlo: {
      const CounterRng rng(cfg.seed);
      RunningMean acc;
      for (std::uint64_t k = 0; k < cfg.samples; ++k) {
        double y = load.additive;
        for (std::size_t n = 0; n < load.users; ++n) {
          y += draw_user_value(load, n, rng, k);
        }
        acc.add(apply(cost, moment, y));
      }
      return acc.estimate();
    }
  }
  return {};
}

std::vector<Estimate> expect_given_user(const SlotLoad& load, std::size_t n,
                                        const CostModel& cost, Moment moment,
                                        const EvalConfig& cfg) {
  if (n >= load.users) throw std::out_of_range("expect_given_user: user");
  const std::size_t M = load.items;
  std::vector<Estimate> out(M + 1);
  switch (cfg.engine) {
    case Engine::enumerate: {
      std::vector<double> acc(M + 1, 0.0);
      enumerate_outcomes(branches(load), n, load.additive,
                         [&](double w, double rest) {
                           for (std::size_t m = 0; m < M; ++m) {
                             acc[m] += w * apply_given(load, n, m, cost, moment,
                                                       rest + load.v(n, m));
                           }
                           acc[M] += w * apply(cost, moment, rest);
                         });
      for (std::size_t m = 0; m <= M; ++m) out[m] = {acc[m], 0.0};
      return out;
    }
    case Engine::analytic_quadratic: {
      const auto c = cost.quadratic_form();
      if (!c) throw UnsupportedEngine("analytic_quadratic needs degree <= 2");
      Moments rest{load.additive, 0.0};
      for (std::size_t k = 0; k < load.users; ++k) {
        if (k == n) continue;
        const Moments u = user_moments(load, k);
        rest.mean += u.mean;
        rest.var += u.var;
      }
      for (std::size_t m = 0; m < M; ++m) {
        out[m] = {quadratic_moment(*c, moment, rest.mean + load.v(n, m), rest.var),
                  0.0};
      }
      out[M] = {quadratic_moment(*c, moment, rest.mean, rest.var), 0.0};
      return out;
    }
    case Engine::monte_carlo: {
      const CounterRng rng(cfg.seed);
      std::vector<RunningMean> acc(M + 1);
      for (std::uint64_t k = 0; k < cfg.samples; ++k) {
        double rest = load.additive;
        for (std::size_t j = 0; j < load.users; ++j) {
          if (j != n) rest += draw_user_value(load, j, rng, k);
        }
        for (std::size_t m = 0; m < M; ++m) {
          acc[m].add(apply_given(load, n, m, cost, moment, rest + load.v(n, m)));
        }
        acc[M].add(apply(cost, moment, rest));
      }
      for (std::size_t m = 0; m <= M; ++m) out[m] = acc[m].estimate();
      return out;
    }
  }
  return out;
}

std::vector<std::vector<Estimate>> expect_given_each_user(
    const SlotLoad& load, const CostModel& cost, Moment moment,
    const EvalConfig& cfg) {
  std::vector<std::vector<Estimate>> out(load.users);
  if (cfg.engine != Engine::analytic_quadratic) {
    for (std::size_t n = 0; n < load.users; ++n) {
      out[n] = expect_given_user(load, n, cost, moment, cfg);
    }
    return out;
  }
  const auto c = cost.quadratic_form();
  if (!c) throw UnsupportedEngine("analytic_quadratic needs degree <= 2");
  std::vector<Moments> per_user(load.users);
  Moments total{load.additive, 0.0};
  for (std::size_t n = 0; n < load.users; ++n) {
    per_user[n] = user_moments(load, n);
    total.mean += per_user[n].mean;
    total.var += per_user[n].var;
  }
  const std::size_t M = load.items;
  for (std::size_t n = 0; n < load.users; ++n) {
    const double mean = total.mean - per_user[n].mean;
    const double var = std::max(0.0, total.var - per_user[n].var);
    out[n].resize(M + 1);
    for (std::size_t m = 0; m < M; ++m) {
      out[n][m] = {quadratic_moment(*c, moment, mean + load.v(n, m), var), 0.0};
    }
    out[n][M] = {quadratic_moment(*c, moment, mean, var), 0.0};
  }
  return out;
}

}  // namespace proshape
