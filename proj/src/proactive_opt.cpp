#include "proshape/proactive_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace proshape {

std::size_t ActiveSets::slot_count(std::size_t t) const {
  std::size_t k = 0;
  for (const auto& users : members[t]) k += users.size();
  return k;
}

bool ActiveSets::contains(std::size_t n, std::size_t t, std::size_t m) const {
  const auto& users = members[t][m];
  return std::binary_search(users.begin(), users.end(), n);
}

bool ActiveSets::empty() const {
  for (std::size_t t = 0; t < slots(); ++t) {
    if (slot_count(t) > 0) return false;
  }
  return true;
}

ActiveSets active_sets(const ItemCatalog& catalog, const DemandProfile& profile,
                       const CostModel& cost, const EvalConfig& cfg) {
  const std::size_t N = profile.users();
  const std::size_t T = profile.slots();
  const std::size_t M = profile.items();
  const auto grad = cost_gradient_x(
      catalog, profile, ProactiveAllocation::zeros_like(profile), cost, cfg);

  ActiveSets sets;
  sets.margin = CycleArray(N, T, M);
  sets.margin_error = CycleArray(N, T, M);
  sets.members.assign(T, std::vector<std::vector<std::size_t>>(M));
  const auto scale = static_cast<double>(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto ts = static_cast<std::ptrdiff_t>(t);
    for (std::size_t m = 0; m < M; ++m) {
      for (std::size_t n = 0; n < N; ++n) {
        const double margin = -scale * grad.value(n, ts, m);
        const double error = scale * grad.std_error(n, ts, m);
        sets.margin(n, ts, m) = margin;
        sets.margin_error(n, ts, m) = error;
        const double band = kActiveSigmas * error;
        if (margin - band > kActiveMargin) {
          sets.members[t][m].push_back(n);
        } else if (margin + band > kActiveMargin) {
          sets.undecided.push_back({n, t, m});
        }
      }
    }
  }
  return sets;
}

namespace {

void project_box(const ItemCatalog& catalog, CycleArray& x) {
  auto& v = x.flat();
  const std::size_t M = x.items();
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = std::clamp(v[i], 0.0, catalog[i % M]);
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// max |x - P(x - g)|
double stationarity(const ItemCatalog& catalog, const CycleArray& x,
                    const CycleArray& g) {
  const std::size_t M = x.items();
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double moved =
        std::clamp(x.flat()[i] - g.flat()[i], 0.0, catalog[i % M]);
    worst = std::max(worst, std::abs(x.flat()[i] - moved));
  }
  return worst;
}

constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-20;
constexpr double kMaxStep = 1e20;

}  // namespace

SolveResult solve_proactive(const ItemCatalog& catalog,
                            const DemandProfile& profile, const CostModel& cost,
                            const EvalConfig& cfg, const SolveOptions& opts,
                            const ProactiveAllocation* start) {
  check_engine(cfg, profile.users(), profile.items(), cost);
  if (!(opts.tol > 0.0)) throw std::invalid_argument("tol must be > 0");

  auto evaluate = [&](const CycleArray& x) {
    return expected_cycle_cost(catalog, profile, ProactiveAllocation(x), cost,
                               cfg);
  };
  auto gradient = [&](const CycleArray& x) {
    return cost_gradient_x(catalog, profile, ProactiveAllocation(x), cost, cfg)
        .value;
  };

  CycleArray x = start != nullptr
                     ? start->array()
                     : CycleArray(profile.users(), profile.slots(),
                                  profile.items());
  project_box(catalog, x);
  Estimate f = evaluate(x);
  CycleArray g = gradient(x);

  double step = opts.step;
  if (!(step > 0.0)) {
    // Curvature along a short projected-gradient probe.
    step = 1.0;
    CycleArray probe = x;
    for (std::size_t i = 0; i < probe.size(); ++i) {
      probe.flat()[i] -= g.flat()[i];
    }
    project_box(catalog, probe);
    constexpr double h = 1e-4;
    double len2 = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
      const double d = h * (probe.flat()[i] - x.flat()[i]);
      probe.flat()[i] = x.flat()[i] + d;
      len2 += d * d;
    }
    if (len2 > 0.0) {
      try {
        const CycleArray gp = gradient(probe);
        double diff2 = 0.0;
        for (std::size_t i = 0; i < gp.size(); ++i) {
          const double d = gp.flat()[i] - g.flat()[i];
          diff2 += d * d;
        }
        const double curvature = std::sqrt(diff2 / len2);
        if (curvature > 0.0 && std::isfinite(curvature)) step = 1.0 / curvature;
      } catch (const DomainError&) {
      }
    }
  }

  SolveResult result;
  result.history.push_back(f.value);
  for (result.iterations = 0;; ++result.iterations) {
    result.residual = stationarity(catalog, x, g);
    if (result.residual <= opts.tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= opts.max_iters) break;

    bool accepted = false;
    CycleArray trial;
    CycleArray g_trial;
    Estimate f_trial;
    for (double a = step; a >= kMinStep; a *= 0.5) {
      trial = x;
      for (std::size_t i = 0; i < trial.size(); ++i) {
        trial.flat()[i] -= a * g.flat()[i];
      }
      project_box(catalog, trial);
      std::vector<double> d(trial.size());
      for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = trial.flat()[i] - x.flat()[i];
      }
      const double slope = dot(g.flat(), d);
      if (!(slope < 0.0)) break;
      try {
        f_trial = evaluate(trial);
      } catch (const DomainError&) {
        continue;
      }
      if (f_trial.value <= f.value + kArmijo * slope) {
        g_trial = gradient(trial);
        accepted = true;
      } else {
        // Convexity gives f(x) - f(trial) >= -<grad f(trial), d>, a decrease
        // certificate that stays exact when f differences drown in rounding.
        g_trial = gradient(trial);
        accepted = -dot(g_trial.flat(), d) >= kArmijo * -slope;
      }
      if (accepted) {
        step = a;
        break;
      }
    }
    if (!accepted) break;

    // Barzilai-Borwein trial step for the next iteration.
    double ss = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < trial.size(); ++i) {
      const double s = trial.flat()[i] - x.flat()[i];
      ss += s * s;
      sy += s * (g_trial.flat()[i] - g.flat()[i]);
    }
    step = sy > 0.0 ? std::clamp(ss / sy, kMinStep, kMaxStep)
                    : std::min(2.0 * step, kMaxStep);

    x = std::move(trial);
    g = std::move(g_trial);
    f = f_trial;
    result.history.push_back(f.value);
  }
  result.x = ProactiveAllocation(std::move(x));
  result.cost = f;
  return result;
}

double golden_section(const std::function<double(double)>& f, double lo,
                      double hi, double tol) {
  if (!(hi >= lo)) throw std::invalid_argument("golden_section: hi < lo");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  // The minimizer may sit on a bound; compare with the endpoints.
  double best = mid;
  double f_best = f(mid);
  for (double end : {lo, hi}) {
    const double fe = f(end);
    if (fe < f_best) {
      best = end;
      f_best = fe;
    }
  }
  return best;
}

namespace {

double expect_or_inf(const SlotLoad& load, const CostModel& cost,
                     const EvalConfig& cfg) {
  try {
    return expect(load, cost, Moment::cost, cfg).value;
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

// Slot t's non-proactive load with x deducted from every active pair.
SlotLoad deducted_load(const ItemCatalog& catalog, const DemandProfile& profile,
                       const ActiveSets& sets, std::size_t t, double x) {
  SlotLoad load = plain_slot_load(catalog, profile, t);
  for (std::size_t m = 0; m < load.items; ++m) {
    for (std::size_t n : sets.members[t][m]) {
      load.value[n * load.items + m] -= x;
    }
  }
  return load;
}

SlotLoad boosted_previous(const ItemCatalog& catalog,
                          const DemandProfile& profile, std::size_t t,
                          double extra) {
  const std::size_t prev = profile.wrap(static_cast<std::ptrdiff_t>(t) - 1);
  SlotLoad load = plain_slot_load(catalog, profile, prev);
  load.additive += extra;
  return load;
}

struct LowerTerms {
  double requested = 0.0;  // sum_{active} E[I C'(deducted L_t)]
  double previous = 0.0;   // K_t E[C'(L_{t-1} + K_t x)]
};

LowerTerms lower_terms(const ItemCatalog& catalog, const DemandProfile& profile,
                       const CostModel& cost, const EvalConfig& cfg,
                       const ActiveSets& sets, std::size_t t, double x) {
  const auto K = static_cast<double>(sets.slot_count(t));
  const SlotLoad cur = deducted_load(catalog, profile, sets, t, x);
  const auto given = expect_given_each_user(cur, cost, Moment::marginal, cfg);
  LowerTerms terms;
  for (std::size_t m = 0; m < cur.items; ++m) {
    for (std::size_t n : sets.members[t][m]) {
      terms.requested += cur.p(n, m) * given[n][m].value;
    }
  }
  terms.previous =
      K * expect(boosted_previous(catalog, profile, t, K * x), cost,
                 Moment::marginal, cfg)
              .value;
  return terms;
}

}  // namespace

PolicyA policy_a(const ItemCatalog& catalog, const DemandProfile& profile,
                 const CostModel& cost, const EvalConfig& cfg,
                 const ActiveSets& sets, double shrink) {
  if (!(shrink > 0.0 && shrink < 1.0)) {
    throw std::invalid_argument("policy_a: shrink must lie in (0, 1)");
  }
  const std::size_t T = profile.slots();
  PolicyA policy;
  policy.x = ProactiveAllocation::zeros_like(profile);
  policy.x_hat.assign(T, 0.0);
  policy.x_tilde.assign(T, 0.0);
  policy.all_empty = sets.empty();
  if (policy.all_empty) return policy;

  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t K = sets.slot_count(t);
    if (K == 0) continue;
    auto objective = [&](double x) {
      return expect_or_inf(boosted_previous(catalog, profile, t,
                                            static_cast<double>(K) * x),
                           cost, cfg) +
             expect_or_inf(deducted_load(catalog, profile, sets, t, x), cost,
                           cfg);
    };
    policy.x_hat[t] = golden_section(objective, 0.0, catalog.s_min());
    smallest = std::min(smallest, policy.x_hat[t]);
  }
  policy.r = shrink * smallest;
  for (std::size_t t = 0; t < T; ++t) {
    if (sets.slot_count(t) == 0) continue;
    policy.x_tilde[t] = std::max(0.0, policy.x_hat[t] - policy.r);
    for (std::size_t m = 0; m < profile.items(); ++m) {
      for (std::size_t n : sets.members[t][m]) {
        policy.x(n, static_cast<std::ptrdiff_t>(t), m) = policy.x_tilde[t];
      }
    }
  }
  return policy;
}

std::vector<double> marginal_ratio(const ItemCatalog& catalog,
                                   const DemandProfile& profile,
                                   const CostModel& cost,
                                   const EvalConfig& cfg,
                                   const ActiveSets& sets,
                                   const PolicyA& policy) {
  std::vector<double> out(profile.slots(),
                          std::numeric_limits<double>::quiet_NaN());
  for (std::size_t t = 0; t < profile.slots(); ++t) {
    if (sets.slot_count(t) == 0) continue;
    const LowerTerms terms = lower_terms(catalog, profile, cost, cfg, sets, t,
                                         policy.x_tilde[t]);
    out[t] = terms.requested / terms.previous;
  }
  return out;
}

CostReductionReport reduction_bounds(const ItemCatalog& catalog,
                                     const DemandProfile& profile,
                                     const CostModel& cost,
                                     const EvalConfig& cfg,
                                     const SolveOptions& opts) {
  const std::size_t T = profile.slots();
  const ActiveSets sets = active_sets(catalog, profile, cost, cfg);
  const PolicyA policy = policy_a(catalog, profile, cost, cfg, sets);

  CostReductionReport report;
  report.any_active = !sets.empty();
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t m = 0; m < profile.items(); ++m) {
      for (std::size_t n : sets.members[t][m]) {
        report.upper +=
            catalog[m] * sets.margin(n, static_cast<std::ptrdiff_t>(t), m);
      }
    }
    if (sets.slot_count(t) == 0) continue;
    const LowerTerms terms = lower_terms(catalog, profile, cost, cfg, sets, t,
                                         policy.x_tilde[t]);
    report.lower += policy.x_tilde[t] * (terms.requested - terms.previous);
  }
  report.upper /= static_cast<double>(T);
  report.lower /= static_cast<double>(T);

  report.nonproactive = nonproactive_cost(catalog, profile, cost, cfg).value;
  report.policy_a_cost =
      expected_cycle_cost(catalog, profile, policy.x, cost, cfg).value;
  const SolveResult best = solve_proactive(catalog, profile, cost, cfg, opts);
  report.optimal_cost = best.cost.value;
  report.solver_converged = best.converged;
  report.delta_c = report.nonproactive - report.optimal_cost;
  return report;
}

double fit_growth_exponent(std::span<const ScalingPoint> points) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& p : points) {
    if (p.users == 0 || !(p.delta_c > 0.0)) continue;
    lx.push_back(std::log(static_cast<double>(p.users)));
    ly.push_back(std::log(p.delta_c));
  }
  if (lx.size() < 3) {
    throw std::invalid_argument(fmt::format(
        "exponent fit needs >= 3 points with positive reduction, got {}",
        lx.size()));
  }
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument("exponent fit needs distinct user counts");
  }
  return sxy / sxx;
}

ScalingCurve scaling_curve(const ScalingFamily& family,
                           std::span<const std::size_t> ladder,
                           const CostModel& cost, const EvalConfig& cfg,
                           const SolveOptions& opts) {
  if (ladder.size() < 3) {
    throw std::invalid_argument(fmt::format(
        "scaling curve needs >= 3 user counts, got {}", ladder.size()));
  }
  ScalingCurve curve;
  for (std::size_t users : ladder) {
    const Instance inst = family.make(users);
    const Estimate base =
        nonproactive_cost(inst.catalog, inst.profile, cost, cfg);
    const SolveResult best =
        solve_proactive(inst.catalog, inst.profile, cost, cfg, opts);
    ScalingPoint p;
    p.users = users;
    p.c_nonproactive = base.value;
    p.c_proactive = best.cost.value;
    p.delta_c = base.value - best.cost.value;
    p.ratio = base.value > 0.0 ? p.delta_c / base.value : 0.0;
    p.std_error = std::hypot(base.std_error, best.cost.std_error);
    p.converged = best.converged;
    curve.points.push_back(p);
  }
  curve.exponent = fit_growth_exponent(curve.points);
  return curve;
}

}  // namespace proshape
