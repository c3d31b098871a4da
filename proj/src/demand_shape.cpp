#include "proshape/demand_shape.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include <fmt/format.h>

namespace proshape {
namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Largest s in [lo, hi] with dist(point(s), center) <= radius, for a distance
// that is nondecreasing in s. point(lo) must be feasible.
std::vector<double> bisect_to_sphere(
    const std::function<std::vector<double>(double)>& point,
    std::span<const double> center, double radius, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (distance(point(mid), center) <= radius) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return point(lo);
}

}  // namespace

FlexibleRow fully_flexible_row(const ItemCatalog& catalog, double silence) {
  FlexibleRow row;
  row.p.assign(catalog.size(), 0.0);
  const auto sizes = catalog.sizes();
  row.item = static_cast<std::size_t>(
      std::min_element(sizes.begin(), sizes.end()) - sizes.begin());
  row.tie = std::count(sizes.begin(), sizes.end(), sizes[row.item]) > 1;
  row.p[row.item] = std::max(0.0, 1.0 - silence);
  return row;
}

DemandProfile fully_flexible_optimum(const ItemCatalog& catalog,
                                     const DemandProfile& profile, bool* tie) {
  DemandProfile out(profile.users(), profile.slots(), profile.items());
  bool any_tie = false;
  for (std::size_t n = 0; n < profile.users(); ++n) {
    for (std::size_t t = 0; t < profile.slots(); ++t) {
      const double q = profile.silence(n, static_cast<std::ptrdiff_t>(t));
      const FlexibleRow row = fully_flexible_row(catalog, q);
      any_tie = any_tie || row.tie;
      out.set_row(n, t, row.p, q);
    }
  }
  if (tie != nullptr) *tie = any_tie;
  return out;
}

bool EbcRegion::contains(std::span<const double> p, double slack) const {
  if (p.size() != center.size()) return false;
  double sum = 0.0;
  for (double v : p) {
    if (v < -slack) return false;
    sum += v;
  }
  return std::abs(sum - mass()) <= slack && distance(p, center) <= radius + slack;
}

bool EbcRegion::interior() const {
  const std::size_t M = center.size();
  if (M < 2) return false;
  const double lowest = *std::min_element(center.begin(), center.end());
  return radius < lowest * std::sqrt(static_cast<double>(M) /
                                     static_cast<double>(M - 1));
}

EbcRegion make_region(std::span<const double> center, double silence,
                      double alpha) {
  if (!(alpha >= 0.0)) {
    throw std::invalid_argument(fmt::format("alpha {} must be >= 0", alpha));
  }
  EbcRegion region;
  region.center.assign(center.begin(), center.end());
  region.silence = silence;
  region.alpha = alpha;
  if (silence < 1.0 && alpha > 0.0) {
    const auto pi = ConditionalProfile::from(center, silence).pi;
    region.radius = region.mass() * alpha * entropy(pi);
  }
  return region;
}

std::vector<double> project_simplex_slice(std::span<const double> y,
                                          double mass) {
  std::vector<double> out(y.size(), 0.0);
  if (!(mass > 0.0) || y.empty()) return out;
  std::vector<double> u(y.begin(), y.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - mass) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = std::max(y[i] - theta, 0.0);
  }
  return out;
}

std::vector<double> project_onto_region(std::span<const double> y,
                                        const EbcRegion& region, double tol) {
  if (y.size() != region.center.size()) {
    throw std::invalid_argument("project_onto_region: size mismatch");
  }
  std::vector<double> z = project_simplex_slice(y, region.mass());
  if (distance(z, region.center) <= region.radius + tol) return z;
  // Minimizer is P_slice(center + s (y - center)) for some s in [0, 1].
  std::vector<double> direction(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    direction[i] = y[i] - region.center[i];
  }
  auto point = [&](double s) {
    std::vector<double> w(region.center);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += s * direction[i];
    return project_simplex_slice(w, region.mass());
  };
  return bisect_to_sphere(point, region.center, region.radius, 0.0, 1.0);
}

std::vector<double> linear_min_over_ebc(std::span<const double> g,
                                        const EbcRegion& region, double tol) {
  const std::size_t M = region.center.size();
  if (g.size() != M) {
    throw std::invalid_argument("linear_min_over_ebc: size mismatch");
  }
  const double mean = std::accumulate(g.begin(), g.end(), 0.0) /
                      static_cast<double>(M);
  double spread = 0.0;
  for (double v : g) spread = std::max(spread, std::abs(v - mean));
  if (!(region.radius > 0.0) || !(spread > 0.0)) return region.center;

  auto point = [&](double tau) {
    std::vector<double> w(region.center);
    for (std::size_t i = 0; i < M; ++i) w[i] -= tau * (g[i] - mean);
    return project_simplex_slice(w, region.mass());
  };
  // Grow tau until the ball binds or the slice minimizer stops moving.
  double lo = 0.0;
  double hi = region.radius / spread;
  std::vector<double> previous = region.center;
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> p = point(hi);
    if (distance(p, region.center) > region.radius) break;
    if (distance(p, previous) <= tol * std::max(region.mass(), 1e-300)) {
      return p;
    }
    previous = std::move(p);
    lo = hi;
    hi *= 2.0;
  }
  return bisect_to_sphere(point, region.center, region.radius, lo, hi);
}

std::vector<std::vector<EbcRegion>> make_regions(const DemandProfile& profile,
                                                 std::span<const double> alpha) {
  const std::size_t N = profile.users();
  if (alpha.size() != 1 && alpha.size() != N) {
    throw std::invalid_argument(fmt::format(
        "alpha needs 1 or {} entries, got {}", N, alpha.size()));
  }
  std::vector<std::vector<EbcRegion>> regions(N);
  for (std::size_t n = 0; n < N; ++n) {
    const double a = alpha.size() == 1 ? alpha[0] : alpha[n];
    for (std::size_t t = 0; t < profile.slots(); ++t) {
      const auto ts = static_cast<std::ptrdiff_t>(t);
      regions[n].push_back(
          make_region(profile.row(n, ts), profile.silence(n, ts), a));
    }
  }
  return regions;
}

namespace {

double max_residual(const DemandProfile& p,
                    const std::vector<std::vector<EbcRegion>>& regions) {
  double worst = 0.0;
  for (std::size_t n = 0; n < regions.size(); ++n) {
    for (std::size_t t = 0; t < regions[n].size(); ++t) {
      const EbcRegion& r = regions[n][t];
      if (!(r.radius > 0.0)) continue;
      const double d = distance(p.row(n, static_cast<std::ptrdiff_t>(t)),
                                r.center);
      worst = std::max(worst, std::abs(d - r.radius));
    }
  }
  return worst;
}

// Items whose conditional load leaves the cost domain carry +inf; a large
// finite stand-in keeps the linear subproblem well defined.
std::vector<double> finite_gradient(std::span<const double> g) {
  double largest = 0.0;
  for (double v : g) {
    if (std::isfinite(v)) largest = std::max(largest, std::abs(v));
  }
  std::vector<double> out(g.begin(), g.end());
  for (double& v : out) {
    if (!std::isfinite(v)) v = 1e6 * (1.0 + largest);
  }
  return out;
}

SolveResult solve_from(const ItemCatalog& catalog, const DemandProfile& p,
                       const CostModel& cost, const EvalConfig& cfg,
                       const SolveOptions& opts,
                       const ProactiveAllocation& start) {
  try {
    return solve_proactive(catalog, p, cost, cfg, opts, &start);
  } catch (const DomainError&) {
    // Warm start infeasible under the new profile.
    return solve_proactive(catalog, p, cost, cfg, opts);
  }
}

}  // namespace

ShapingResult shape_demand(const ItemCatalog& catalog,
                           const DemandProfile& profile, const CostModel& cost,
                           const EvalConfig& cfg,
                           std::span<const double> alpha,
                           const ShapeOptions& opts) {
  if (cfg.engine == Engine::monte_carlo) {
    throw UnsupportedEngine("demand shaping needs an exact engine");
  }
  const auto regions = make_regions(profile, alpha);
  const std::size_t N = profile.users();
  const std::size_t T = profile.slots();

  ShapingResult result;
  SolveResult sol = solve_proactive(catalog, profile, cost, cfg, opts.inner);
  result.p = profile;
  result.x = sol.x;
  double f = sol.cost.value;
  result.trace.iterates.push_back(
      {result.p, result.x, f, max_residual(result.p, regions)});

  bool any_ball = false;
  for (const auto& user : regions) {
    for (const auto& r : user) any_ball = any_ball || r.radius > 0.0;
  }
  result.trace.converged = !any_ball;

  for (std::size_t k = 1; any_ball && k <= opts.max_outer; ++k) {
    const CycleArray g =
        cost_gradient_p(catalog, result.p, result.x, cost, cfg);
    DemandProfile next(N, T, profile.items());
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t t = 0; t < T; ++t) {
        const EbcRegion& r = regions[n][t];
        const auto off = g.offset(n, static_cast<std::ptrdiff_t>(t), 0);
        const auto row = finite_gradient(
            std::span<const double>(g.flat().data() + off, profile.items()));
        next.set_row(n, t, linear_min_over_ebc(row, r), r.silence);
      }
    }
    sol = solve_from(catalog, next, cost, cfg, opts.inner, result.x);
    const double f_next = sol.cost.value;
    if (f_next > f + 1e-12 * (1.0 + std::abs(f))) {
      throw DescentViolation(fmt::format(
          "shaping objective rose from {:.12g} to {:.12g} at iteration {}", f,
          f_next, k));
    }
    double step = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      for (std::size_t t = 0; t < T; ++t) {
        const auto ts = static_cast<std::ptrdiff_t>(t);
        const auto a = next.row(n, ts);
        const auto b = result.p.row(n, ts);
        for (std::size_t m = 0; m < a.size(); ++m) {
          step = std::max(step, std::abs(a[m] - b[m]));
        }
      }
    }
    result.p = std::move(next);
    result.x = sol.x;
    result.trace.iterates.push_back(
        {result.p, result.x, f_next, max_residual(result.p, regions)});
    // A small objective change alone stops too early: near a stationary
    // point f moves quadratically in the step.
    const bool settled =
        std::abs(f_next - f) <= opts.tol_outer * (1.0 + std::abs(f_next)) &&
        step <= opts.tol_step;
    f = f_next;
    if (settled) {
      result.trace.converged = true;
      break;
    }
  }
  result.trace.boundary_residuals = boundary_check(result.p, regions).residual;
  return result;
}

bool BoundaryReport::passes(double tol) const {
  for (std::size_t i = 0; i < residual.size(); ++i) {
    if (hypothesis[i] && residual[i] > tol) return false;
  }
  return true;
}

BoundaryReport boundary_check(
    const DemandProfile& shaped,
    const std::vector<std::vector<EbcRegion>>& regions) {
  BoundaryReport report;
  for (std::size_t n = 0; n < shaped.users(); ++n) {
    for (std::size_t t = 0; t < shaped.slots(); ++t) {
      const EbcRegion& r = regions.at(n).at(t);
      const double d =
          distance(shaped.row(n, static_cast<std::ptrdiff_t>(t)), r.center);
      report.residual.push_back(r.radius > 0.0 ? std::abs(d - r.radius) : d);
      report.hypothesis.push_back(r.radius > 0.0 ? r.interior() : true);
      report.radius.push_back(r.radius);
    }
  }
  return report;
}

double shaping_gain_condition(const ItemCatalog& catalog,
                              std::span<const double> original,
                              std::span<const double> candidate,
                              std::span<const double> x) {
  const std::size_t M = catalog.size();
  if (original.size() != M || candidate.size() != M || x.size() != M) {
    throw std::invalid_argument("shaping_gain_condition: size mismatch");
  }
  double sum = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    sum += (catalog[m] - x[m]) * (original[m] - candidate[m]);
  }
  return sum;
}

}  // namespace proshape
