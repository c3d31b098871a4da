#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "proshape/catalog_demand.hpp"
#include "proshape/cost_model.hpp"
#include "proshape/load_eval.hpp"

namespace proshape {

/// Users whose request for item m in slot t is worth prefetching at zero
/// allocation: margin E[I_{n,t}(m) C'(L_t)] - E[C'(L_{t-1})] > 1e-12, with
/// L the non-proactive loads.
struct ActiveSets {
  CycleArray margin;
  CycleArray margin_error;  ///< Monte Carlo standard error, else 0
  /// members[t][m]: sorted user indices.
  std::vector<std::vector<std::vector<std::size_t>>> members;
  /// (n, t, m) cells a Monte Carlo estimate could not place at 4 sigma.
  std::vector<std::array<std::size_t, 3>> undecided;

  [[nodiscard]] std::size_t slots() const noexcept { return members.size(); }
  [[nodiscard]] std::size_t count(std::size_t t, std::size_t m) const {
    return members[t][m].size();
  }
  /// Number of active (n, m) pairs in slot t.
  [[nodiscard]] std::size_t slot_count(std::size_t t) const;
  [[nodiscard]] bool contains(std::size_t n, std::size_t t,
                              std::size_t m) const;
  [[nodiscard]] bool empty() const;
};

inline constexpr double kActiveMargin = 1e-12;
inline constexpr double kActiveSigmas = 4.0;

[[nodiscard]] ActiveSets active_sets(const ItemCatalog& catalog,
                                     const DemandProfile& profile,
                                     const CostModel& cost,
                                     const EvalConfig& cfg);

struct SolveOptions {
  double tol = 1e-8;          ///< on max |x - P(x - grad)|
  std::size_t max_iters = 5000;
  double step = 0.0;          ///< initial step; 0 estimates 1/curvature
};

struct SolveResult {
  ProactiveAllocation x;
  Estimate cost;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> history;  ///< objective after each accepted step
};

/// Minimizes expected_cycle_cost over 0 <= x <= S(m) by projected gradient
/// with Armijo backtracking. Starts from `start` when given, else x = 0.
/// Non-convergence is reported through SolveResult::converged.
[[nodiscard]] SolveResult solve_proactive(
    const ItemCatalog& catalog, const DemandProfile& profile,
    const CostModel& cost, const EvalConfig& cfg, const SolveOptions& opts = {},
    const ProactiveAllocation* start = nullptr);

/// Equal allocation x~_t to every active (user, item) pair of slot t.
struct PolicyA {
  ProactiveAllocation x;
  std::vector<double> x_hat;    ///< per-slot 1-D minimizer, 0 for empty slots
  std::vector<double> x_tilde;  ///< x_hat - r, 0 for empty slots
  double r = 0.0;
  bool all_empty = false;
};

inline constexpr double kDefaultShrink = 1e-3;

/// Per slot t with active pairs, x_hat_t minimizes
///   E[C(L_{t-1} + K_t x)] + E[C(L_t - x sum_{active} I)]  over [0, S_min]
/// by golden-section search to 1e-8; r = shrink * min_t x_hat_t.
[[nodiscard]] PolicyA policy_a(const ItemCatalog& catalog,
                               const DemandProfile& profile,
                               const CostModel& cost, const EvalConfig& cfg,
                               const ActiveSets& sets,
                               double shrink = kDefaultShrink);

/// Minimizes a convex function on [lo, hi] to interval width `tol`.
/// Infinite values are allowed (extended-value convex functions).
[[nodiscard]] double golden_section(const std::function<double(double)>& f,
                                    double lo, double hi, double tol = 1e-8);

struct CostReductionReport {
  double nonproactive = 0.0;
  double optimal_cost = 0.0;
  double policy_a_cost = 0.0;
  double delta_c = 0.0;
  double upper = 0.0;
  double lower = 0.0;
  bool any_active = false;
  bool solver_converged = false;
};

/// Upper bound (1/T) sum_t sum_m S(m) sum_{n in B_t(m)} margin, and the
/// Policy A lower bound
///   (1/T) sum_t x~_t [ sum_{(n,m) active} E[I C'(L_t - x~_t sum_active I)]
///                      - K_t E[C'(L_{t-1} + K_t x~_t)] ].
[[nodiscard]] CostReductionReport reduction_bounds(
    const ItemCatalog& catalog, const DemandProfile& profile,
    const CostModel& cost, const EvalConfig& cfg,
    const SolveOptions& opts = {});

/// Per slot: sum over active pairs of E[I C'(deducted L_t)] divided by
/// K_t E[C'(L_{t-1} + K_t x~_t)]. NaN for slots without active pairs.
/// Diagnostic only; values above 1 are what the asymptotic growth argument
/// requires.
[[nodiscard]] std::vector<double> marginal_ratio(const ItemCatalog& catalog,
                                                 const DemandProfile& profile,
                                                 const CostModel& cost,
                                                 const EvalConfig& cfg,
                                                 const ActiveSets& sets,
                                                 const PolicyA& policy);

struct Instance {
  ItemCatalog catalog;
  DemandProfile profile;
};

/// Deterministic instance generator indexed by user count.
struct ScalingFamily {
  std::string name;
  std::function<Instance(std::size_t users)> make;
};

struct ScalingPoint {
  std::size_t users = 0;
  double c_nonproactive = 0.0;
  double c_proactive = 0.0;
  double delta_c = 0.0;
  double ratio = 0.0;
  double std_error = 0.0;
  bool converged = false;
};

struct ScalingCurve {
  std::vector<ScalingPoint> points;
  double exponent = 0.0;
};

/// Least-squares slope of log(delta_c) against log(N). Needs at least three
/// points with delta_c > 0; throws std::invalid_argument otherwise.
[[nodiscard]] double fit_growth_exponent(std::span<const ScalingPoint> points);

[[nodiscard]] ScalingCurve scaling_curve(const ScalingFamily& family,
                                         std::span<const std::size_t> ladder,
                                         const CostModel& cost,
                                         const EvalConfig& cfg,
                                         const SolveOptions& opts = {});

}  // namespace proshape
