#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "proshape/catalog_demand.hpp"
#include "proshape/cost_model.hpp"
#include "proshape/load_eval.hpp"
#include "proshape/proactive_opt.hpp"

namespace proshape {

inline constexpr double kDefaultShapeAlpha = 0.2;

/// Most-predictable demand when the user accepts any profile: all request
/// mass 1 - q on the smallest item (lowest index on ties).
struct FlexibleRow {
  std::vector<double> p;
  std::size_t item = 0;
  bool tie = false;
};

[[nodiscard]] FlexibleRow fully_flexible_row(const ItemCatalog& catalog,
                                             double silence);

/// fully_flexible_row() for every (user, slot), keeping each silence q.
[[nodiscard]] DemandProfile fully_flexible_optimum(const ItemCatalog& catalog,
                                                   const DemandProfile& profile,
                                                   bool* tie = nullptr);

/// Entropy-ball satisfaction region of one (user, slot):
///   p >= 0, sum p = 1 - q, |p - center| <= (1 - q) alpha H(center / (1 - q)).
struct EbcRegion {
  std::vector<double> center;
  double silence = 1.0;
  double alpha = 0.0;
  double radius = 0.0;

  [[nodiscard]] double mass() const noexcept { return 1.0 - silence; }
  [[nodiscard]] bool contains(std::span<const double> p,
                              double slack = 1e-9) const;
  /// Ball strictly inside the simplex slice:
  ///   radius < min_m center(m) sqrt(M / (M - 1)).
  [[nodiscard]] bool interior() const;
};

[[nodiscard]] EbcRegion make_region(std::span<const double> center,
                                    double silence, double alpha);

/// Euclidean projection onto {p >= 0, sum p = mass}.
[[nodiscard]] std::vector<double> project_simplex_slice(
    std::span<const double> y, double mass);

/// Euclidean projection onto the region.
[[nodiscard]] std::vector<double> project_onto_region(
    std::span<const double> y, const EbcRegion& region, double tol = 1e-12);

/// argmin <g, p> over the region. The minimizer has the form
/// P_slice(center - tau g); tau is found by bisection on the ball constraint.
[[nodiscard]] std::vector<double> linear_min_over_ebc(
    std::span<const double> g, const EbcRegion& region, double tol = 1e-10);

/// Regions for every (user, slot) with per-user alpha.
[[nodiscard]] std::vector<std::vector<EbcRegion>> make_regions(
    const DemandProfile& profile, std::span<const double> alpha);

struct ShapeOptions {
  double tol_outer = 1e-8;  ///< on |f0^k - f0^{k-1}| / (1 + |f0^k|)
  double tol_step = 1e-7;   ///< on max |p^k - p^{k-1}|; both must hold to stop
  std::size_t max_outer = 100;
  SolveOptions inner;
};

struct ShapingIterate {
  DemandProfile p;
  ProactiveAllocation x;
  double f0 = 0.0;
  double max_boundary_residual = 0.0;
};

struct ShapingTrace {
  std::vector<ShapingIterate> iterates;
  bool converged = false;
  /// Final |dist(center, p) - radius| indexed [n * T + t].
  std::vector<double> boundary_residuals;
};

struct ShapingResult {
  DemandProfile p;
  ProactiveAllocation x;
  ShapingTrace trace;
};

/// Raised when an outer iteration increases the objective.
class DescentViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Successive convex approximation: each outer step minimizes f0 linearized
/// in p (exact in x) over the entropy balls, which splits into per-(n, t)
/// linear problems and one proactive solve.
/// `alpha` has one entry per user, or a single entry shared by all.
[[nodiscard]] ShapingResult shape_demand(const ItemCatalog& catalog,
                                         const DemandProfile& profile,
                                         const CostModel& cost,
                                         const EvalConfig& cfg,
                                         std::span<const double> alpha,
                                         const ShapeOptions& opts = {});

struct BoundaryReport {
  std::vector<double> residual;   ///< [n * T + t]
  std::vector<bool> hypothesis;   ///< ball strictly inside the slice
  std::vector<double> radius;

  /// True when every row whose hypothesis holds has residual <= tol.
  [[nodiscard]] bool passes(double tol) const;
};

[[nodiscard]] BoundaryReport boundary_check(
    const DemandProfile& shaped,
    const std::vector<std::vector<EbcRegion>>& regions);

/// sum_m (S(m) - x(m)) (original(m) - candidate(m)); positive values certify
/// a strict gain from moving user demand to `candidate`.
[[nodiscard]] double shaping_gain_condition(const ItemCatalog& catalog,
                                            std::span<const double> original,
                                            std::span<const double> candidate,
                                            std::span<const double> x);

}  // namespace proshape
