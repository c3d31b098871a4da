#include "proshape/experiments.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

namespace proshape {
namespace {

constexpr std::array<double, 3> kPreferenceA{0.8, 0.1, 0.1};
constexpr std::array<double, 3> kPreferenceB{0.3, 0.1, 0.6};
constexpr std::array<double, 8> kCycleSilence{0.9, 0.4,  0.01, 0.8,
                                              0.2, 0.7, 0.05, 0.1};
constexpr double kPeak = 0.9;

std::vector<double> scaled(const std::array<double, 3>& pi, double mass) {
  return {pi[0] * mass, pi[1] * mass, pi[2] * mass};
}

}  // namespace

Instance two_user_instance(double p_peak, double p_off) {
  DemandProfile profile(2, 2, 3);
  profile.set_row(0, 0, scaled(kPreferenceA, p_off), 1.0 - p_off);
  profile.set_row(1, 0, scaled(kPreferenceB, p_off), 1.0 - p_off);
  profile.set_row(0, 1, scaled(kPreferenceA, p_peak), 1.0 - p_peak);
  profile.set_row(1, 1, scaled(kPreferenceB, p_peak), 1.0 - p_peak);
  return {ItemCatalog({3.0, 2.0, 4.0}), normalize_profile(profile)};
}

std::vector<std::vector<double>> two_user_ratings() {
  return {{kPreferenceA.begin(), kPreferenceA.end()},
          {kPreferenceB.begin(), kPreferenceB.end()}};
}

CostModel two_user_cost(CostKind kind) {
  switch (kind) {
    case CostKind::quadratic: return CostModel::quadratic();
    case CostKind::outage: return CostModel::outage(kTwoUserCapacity);
    case CostKind::polynomial: break;
  }
  throw std::invalid_argument("two-user example uses quadratic or outage cost");
}

ScalingFamily zipf_cycle_family(std::uint64_t seed) {
  const std::vector<double> sizes =
      random_integer_sizes(50, 10, 30, CounterRng(seed));
  ScalingFamily family;
  family.name = "zipf-cycle";
  family.make = [sizes](std::size_t users) {
    const std::size_t T = kCycleSilence.size();
    DemandProfile profile(users, T, sizes.size());
    for (std::size_t t = 0; t < T; ++t) {
      const auto row = zipf_profile(sizes.size(), 4.0, 1.0 - kCycleSilence[t]);
      for (std::size_t n = 0; n < users; ++n) {
        profile.set_row(n, t, row, kCycleSilence[t]);
      }
    }
    return Instance{ItemCatalog(sizes), normalize_profile(profile)};
  };
  return family;
}

TwoUserReport reproduce_two_user(CostKind kind, double alpha,
                                 const ShapeOptions& opts) {
  const CostModel cost = two_user_cost(kind);
  const EvalConfig cfg;  // enumerate
  TwoUserReport report;
  report.kind = kind;

  for (int step = 1; step <= 9; ++step) {
    SweepPoint point;
    point.p_peak = 0.1 * step;
    const Instance inst = two_user_instance(point.p_peak);
    try {
      point.c_nonproactive =
          nonproactive_cost(inst.catalog, inst.profile, cost, cfg).value;
      point.c_proactive =
          solve_proactive(inst.catalog, inst.profile, cost, cfg, opts.inner)
              .cost.value;
    } catch (const DomainError& e) {
      point.feasible = false;
      point.note = e.what();
    }
    report.sweep.push_back(point);
  }

  const Instance inst = two_user_instance(kPeak);
  const double alphas[] = {alpha};
  ShapingResult shaped =
      shape_demand(inst.catalog, inst.profile, cost, cfg, alphas, opts);
  report.trace = std::move(shaped.trace);

  const auto ratings = two_user_ratings();
  constexpr std::ptrdiff_t peak = 1;
  for (std::size_t n = 0; n < 2; ++n) {
    ShapedUser u;
    u.user = n;
    const double q = inst.profile.silence(n, peak);
    u.original =
        ConditionalProfile::from(inst.profile.row(n, peak), q).pi;
    u.shaped = ConditionalProfile::from(shaped.p.row(n, peak), q).pi;
    double d2 = 0.0;
    for (std::size_t m = 0; m < u.original.size(); ++m) {
      d2 += (u.original[m] - u.shaped[m]) * (u.original[m] - u.shaped[m]);
    }
    u.distance = std::sqrt(d2);
    u.target = alpha * entropy(u.original);
    u.interior = make_region(inst.profile.row(n, peak), q, alpha).interior();
    u.rating = solve_rating(shaped.p.row(n, peak), q, ratings[n]);
    report.users.push_back(std::move(u));
  }
  return report;
}

ScalingCurve reproduce_scaling(std::uint64_t seed,
                               std::vector<std::size_t> ladder,
                               const SolveOptions& opts) {
  EvalConfig cfg;
  cfg.engine = Engine::analytic_quadratic;
  cfg.seed = seed;
  return scaling_curve(zipf_cycle_family(seed), ladder, CostModel::quadratic(),
                       cfg, opts);
}

}  // namespace proshape
