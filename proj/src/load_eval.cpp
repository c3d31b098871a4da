#include "proshape/load_eval.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace proshape {

double ProactiveAllocation::slot_total(std::ptrdiff_t t) const {
  double sum = 0.0;
  for (std::size_t n = 0; n < users(); ++n) {
    for (std::size_t m = 0; m < items(); ++m) sum += x_(n, t, m);
  }
  return sum;
}

void ProactiveAllocation::check(const ItemCatalog& catalog,
                                const DemandProfile& profile) const {
  if (users() != profile.users() || slots() != profile.slots() ||
      items() != profile.items() || items() != catalog.size()) {
    throw std::invalid_argument(fmt::format(
        "allocation shape {}x{}x{} does not match profile {}x{}x{}", users(),
        slots(), items(), profile.users(), profile.slots(), profile.items()));
  }
  for (std::size_t n = 0; n < users(); ++n) {
    for (std::size_t t = 0; t < slots(); ++t) {
      for (std::size_t m = 0; m < items(); ++m) {
        const double x = x_(n, static_cast<std::ptrdiff_t>(t), m);
        if (!(x >= 0.0 && x <= catalog[m])) {
          throw std::invalid_argument(fmt::format(
              "x[{}][{}][{}] = {} outside [0, {}]", n, t, m, x, catalog[m]));
        }
      }
    }
  }
}

double slot_load(const ItemCatalog& catalog, const RequestOutcome& outcome,
                 const ProactiveAllocation& alloc, std::ptrdiff_t t) {
  double y = alloc.slot_total(t + 1);
  for (std::size_t n = 0; n < outcome.choice.size(); ++n) {
    const std::size_t c = outcome.choice[n];
    if (c == 0) continue;
    y += catalog[c - 1] - alloc(n, t, c - 1);
  }
  return y;
}

SlotLoad proactive_slot_load(const ItemCatalog& catalog,
                             const DemandProfile& profile,
                             const ProactiveAllocation& alloc, std::size_t t) {
  SlotLoad load = plain_slot_load(catalog, profile, t);
  const auto ts = static_cast<std::ptrdiff_t>(load.slot);
  for (std::size_t n = 0; n < load.users; ++n) {
    for (std::size_t m = 0; m < load.items; ++m) {
      load.value[n * load.items + m] -= alloc(n, ts, m);
    }
  }
  load.additive = alloc.slot_total(ts + 1);
  return load;
}

std::vector<Estimate> slot_costs(const ItemCatalog& catalog,
                                 const DemandProfile& profile,
                                 const ProactiveAllocation& alloc,
                                 const CostModel& cost, const EvalConfig& cfg) {
  check_engine(cfg, profile.users(), profile.items(), cost);
  std::vector<Estimate> out(profile.slots());
  for (std::size_t t = 0; t < profile.slots(); ++t) {
    out[t] = expect(proactive_slot_load(catalog, profile, alloc, t), cost,
                    Moment::cost, cfg);
  }
  return out;
}

Estimate expected_cycle_cost(const ItemCatalog& catalog,
                             const DemandProfile& profile,
                             const ProactiveAllocation& alloc,
                             const CostModel& cost, const EvalConfig& cfg) {
  const auto per_slot = slot_costs(catalog, profile, alloc, cost, cfg);
  const auto T = static_cast<double>(per_slot.size());
  double value = 0.0;
  double var = 0.0;
  for (const Estimate& e : per_slot) {
    value += e.value;
    var += e.std_error * e.std_error;
  }
  return {value / T, std::sqrt(var) / T};
}

Estimate nonproactive_cost(const ItemCatalog& catalog,
                           const DemandProfile& profile, const CostModel& cost,
                           const EvalConfig& cfg) {
  return expected_cycle_cost(catalog, profile,
                             ProactiveAllocation::zeros_like(profile), cost,
                             cfg);
}

namespace {

CycleGradient exact_gradient_x(const ItemCatalog& catalog,
                               const DemandProfile& profile,
                               const ProactiveAllocation& alloc,
                               const CostModel& cost, const EvalConfig& cfg) {
  const std::size_t N = profile.users();
  const std::size_t T = profile.slots();
  const std::size_t M = profile.items();
  const double inv_t = 1.0 / static_cast<double>(T);

  std::vector<SlotLoad> loads;
  std::vector<double> mean_marginal(T);
  loads.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    loads.push_back(proactive_slot_load(catalog, profile, alloc, t));
    mean_marginal[t] = expect(loads[t], cost, Moment::marginal, cfg).value;
  }

  CycleGradient g{CycleArray(N, T, M), CycleArray(N, T, M)};
  for (std::size_t t = 0; t < T; ++t) {
    const double previous = mean_marginal[(t + T - 1) % T];
    const auto given =
        expect_given_each_user(loads[t], cost, Moment::marginal, cfg);
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t m = 0; m < M; ++m) {
        const double p = loads[t].p(n, m);
        const double requested = p > 0.0 ? p * given[n][m].value : 0.0;
        g.value(n, static_cast<std::ptrdiff_t>(t), m) =
            inv_t * (previous - requested);
      }
    }
  }
  return g;
}

// Pathwise: d Y_{t-1}/dx_{n,t}(m) = 1, d Y_t/dx_{n,t}(m) = -1{n requests m}.
CycleGradient sampled_gradient_x(const ItemCatalog& catalog,
                                 const DemandProfile& profile,
                                 const ProactiveAllocation& alloc,
                                 const CostModel& cost, const EvalConfig& cfg) {
  const std::size_t N = profile.users();
  const std::size_t T = profile.slots();
  const std::size_t M = profile.items();
  const double inv_t = 1.0 / static_cast<double>(T);
  const CounterRng rng(cfg.seed);

  CycleArray sum(N, T, M);
  CycleArray sum_sq(N, T, M);
  std::vector<double> marginal(T);
  std::vector<RequestOutcome> outcomes(T);
  for (std::uint64_t k = 0; k < cfg.samples; ++k) {
    for (std::size_t t = 0; t < T; ++t) {
      outcomes[t] = sample_outcome(profile, t, rng, k);
      marginal[t] = cost.marginal(slot_load(
          catalog, outcomes[t], alloc, static_cast<std::ptrdiff_t>(t)));
    }
    for (std::size_t t = 0; t < T; ++t) {
      const auto ts = static_cast<std::ptrdiff_t>(t);
      const double previous = marginal[(t + T - 1) % T];
      for (std::size_t n = 0; n < N; ++n) {
        const std::size_t c = outcomes[t].choice[n];
        for (std::size_t m = 0; m < M; ++m) {
          const double d =
              inv_t * (previous - (c == m + 1 ? marginal[t] : 0.0));
          sum(n, ts, m) += d;
          sum_sq(n, ts, m) += d * d;
        }
      }
    }
  }

  const auto K = static_cast<double>(cfg.samples);
  CycleGradient g{CycleArray(N, T, M), CycleArray(N, T, M)};
  for (std::size_t i = 0; i < sum.size(); ++i) {
    const double mean = sum.flat()[i] / K;
    const double var =
        std::max(0.0, (sum_sq.flat()[i] - K * mean * mean) / (K - 1.0));
    g.value.flat()[i] = mean;
    g.std_error.flat()[i] = std::sqrt(var / K);
  }
  return g;
}

}  // namespace

CycleGradient cost_gradient_x(const ItemCatalog& catalog,
                              const DemandProfile& profile,
                              const ProactiveAllocation& alloc,
                              const CostModel& cost, const EvalConfig& cfg) {
  check_engine(cfg, profile.users(), profile.items(), cost);
  if (cfg.engine == Engine::monte_carlo) {
    return sampled_gradient_x(catalog, profile, alloc, cost, cfg);
  }
  return exact_gradient_x(catalog, profile, alloc, cost, cfg);
}

CycleArray cost_gradient_p(const ItemCatalog& catalog,
                           const DemandProfile& profile,
                           const ProactiveAllocation& alloc,
                           const CostModel& cost, const EvalConfig& cfg) {
  if (cfg.engine == Engine::monte_carlo) {
    throw UnsupportedEngine(
        "cost_gradient_p needs an exact engine (enumerate or "
        "analytic_quadratic)");
  }
  check_engine(cfg, profile.users(), profile.items(), cost);
  const std::size_t N = profile.users();
  const std::size_t T = profile.slots();
  const std::size_t M = profile.items();
  const double inv_t = 1.0 / static_cast<double>(T);

  CycleArray g(N, T, M);
  for (std::size_t t = 0; t < T; ++t) {
    const SlotLoad load = proactive_slot_load(catalog, profile, alloc, t);
    const auto given = expect_given_each_user(load, cost, Moment::cost, cfg);
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t m = 0; m < M; ++m) {
        g(n, static_cast<std::ptrdiff_t>(t), m) =
            inv_t * (given[n][m].value - given[n][M].value);
      }
    }
  }
  return g;
}

}  // namespace proshape
