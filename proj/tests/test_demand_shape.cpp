#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "oracle.hpp"
#include "proshape/demand_shape.hpp"
#include "proshape/experiments.hpp"

using namespace proshape;

namespace {

const EvalConfig kEnumerate{Engine::enumerate};

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

std::vector<double> random_center(std::mt19937_64& rng, std::size_t M,
                                  double mass) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> c(M);
  double sum = 0.0;
  for (double& v : c) {
    v = u(rng);
    sum += v;
  }
  for (double& v : c) v *= mass / sum;
  return c;
}

// Random point of the region by rejection from the slice.
std::vector<double> random_member(std::mt19937_64& rng, const EbcRegion& r) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t M = r.center.size();
  while (true) {
    std::vector<double> d(M);
    double mean = 0.0;
    for (double& v : d) {
      v = g(rng);
      mean += v / static_cast<double>(M);
    }
    for (double& v : d) v -= mean;
    const double norm = std::sqrt(dot(d, d));
    const double len = r.radius * std::sqrt(u(rng));
    std::vector<double> p(M);
    bool ok = true;
    for (std::size_t m = 0; m < M; ++m) {
      p[m] = r.center[m] + len * d[m] / norm;
      ok = ok && p[m] >= 0.0;
    }
    if (ok) return p;
  }
}

}  // namespace

TEST_SUITE("demand_shape") {
  TEST_CASE("fully flexible rows") {
    const ItemCatalog s({3.0, 2.0, 4.0});
    const FlexibleRow a = fully_flexible_row(s, 0.1);
    CHECK(a.p == std::vector<double>{0.0, 0.9, 0.0});
    CHECK(a.item == 1);
    CHECK_FALSE(a.tie);

    const FlexibleRow b = fully_flexible_row(ItemCatalog({2.0, 2.0}), 0.0);
    CHECK(b.p == std::vector<double>{1.0, 0.0});
    CHECK(b.tie);

    const FlexibleRow c = fully_flexible_row(s, 1.0);
    CHECK(c.p == std::vector<double>{0.0, 0.0, 0.0});

    const Instance inst = two_user_instance(0.9);
    bool tie = true;
    const DemandProfile star = fully_flexible_optimum(inst.catalog, inst.profile, &tie);
    CHECK_FALSE(tie);
    CHECK(validate_profile(star).empty());
    CHECK(star.prob(1, 1, 1) == doctest::Approx(0.9));
    CHECK(star.silence(1, 1) == inst.profile.silence(1, 1));
  }

  TEST_CASE("region geometry") {
    const EbcRegion r = make_region(std::vector<double>{0.72, 0.09, 0.09}, 0.1, 0.2);
    const double h = entropy(std::vector<double>{0.8, 0.1, 0.1});
    CHECK(r.radius == doctest::Approx(0.9 * 0.2 * h).epsilon(1e-14));
    CHECK(r.contains(r.center));
    CHECK(r.interior() == (r.radius < 0.09 * std::sqrt(1.5)));

    const EbcRegion point = make_region(std::vector<double>{0.0, 0.6}, 0.4, 0.5);
    CHECK(point.radius == 0.0);
    const EbcRegion silent = make_region(std::vector<double>{0.0, 0.0}, 1.0, 0.5);
    CHECK(silent.radius == 0.0);
    CHECK(silent.contains(std::vector<double>{0.0, 0.0}));

    CHECK_THROWS_AS((void)make_region(std::vector<double>{0.5, 0.5}, 0.0, -0.1),
                    std::invalid_argument);
  }

  TEST_CASE("simplex-slice projection satisfies its optimality condition") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t M = 1 + trial % 6;
      const double mass = 0.1 + 0.9 * (trial % 7) / 6.0;
      std::vector<double> y(M);
      for (double& v : y) v = g(rng);
      const auto p = project_simplex_slice(y, mass);
      CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(mass));
      // KKT: y - p = tau on the support, y - p <= tau off it.
      double tau = -INFINITY;
      for (std::size_t m = 0; m < M; ++m) {
        CHECK(p[m] >= 0.0);
        if (p[m] > 0.0) tau = y[m] - p[m];
      }
      for (std::size_t m = 0; m < M; ++m) {
        if (p[m] > 0.0) CHECK(y[m] - p[m] == doctest::Approx(tau).epsilon(1e-12));
        else CHECK(y[m] <= tau + 1e-12);
      }
    }
  }

  TEST_CASE("region projection beats random members") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g(0.0, 0.3);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t M = 2 + trial % 3;
      const double q = 0.1 * (trial % 5);
      const auto center = random_center(rng, M, 1.0 - q);
      const EbcRegion r = make_region(center, q, 0.3);
      std::vector<double> y(M);
      for (std::size_t m = 0; m < M; ++m) y[m] = center[m] + g(rng);
      const auto p = project_onto_region(y, r);
      CHECK(r.contains(p));
      const double best = dist(p, y);
      for (int k = 0; k < 50; ++k) {
        CHECK(best <= dist(random_member(rng, r), y) + 1e-9);
      }
    }
  }

  TEST_CASE("linear minimization matches a dense boundary enumeration") {
    // A linear objective is minimized on the boundary of the region: the
    // circle where the ball meets the simplex plane, or a simplex edge.
    // Both are walked with a fine parameter step.
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double e1[3] = {1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0.0};
    const double e2[3] = {1.0 / std::sqrt(6.0), 1.0 / std::sqrt(6.0), -2.0 / std::sqrt(6.0)};
    for (int trial = 0; trial < 20; ++trial) {
      const double q = 0.05 * (trial % 6);
      const auto center = random_center(rng, 3, 1.0 - q);
      const EbcRegion r = make_region(center, q, 0.1 + 0.05 * (trial % 5));
      const std::vector<double> g{gauss(rng), gauss(rng), gauss(rng)};
      const auto p = linear_min_over_ebc(g, r);
      CHECK(r.contains(p));

      double best = INFINITY;
      std::vector<double> arg;
      auto consider = [&](const std::vector<double>& z) {
        const double v = dot(g, z);
        if (v < best) {
          best = v;
          arg = z;
        }
      };
      const int steps = 2'000'000;
      for (int k = 0; k < steps; ++k) {
        const double th = 2.0 * std::numbers::pi * k / steps;
        std::vector<double> z(3);
        bool ok = true;
        for (std::size_t m = 0; m < 3; ++m) {
          z[m] = r.center[m] + r.radius * (std::cos(th) * e1[m] + std::sin(th) * e2[m]);
          ok = ok && z[m] >= 0.0;
        }
        if (ok) consider(z);
      }
      for (std::size_t zero = 0; zero < 3; ++zero) {
        const std::size_t i = (zero + 1) % 3;
        const std::size_t j = (zero + 2) % 3;
        for (int k = 0; k <= steps; ++k) {
          std::vector<double> z(3, 0.0);
          z[i] = r.mass() * k / steps;
          z[j] = r.mass() - z[i];
          if (dist(z, r.center) <= r.radius) consider(z);
        }
      }
      REQUIRE_FALSE(arg.empty());
      CHECK(dot(g, p) <= best + 1e-12);
      for (std::size_t m = 0; m < 3; ++m) CHECK(std::abs(p[m] - arg[m]) <= 1e-4);
    }
  }

  TEST_CASE("linear minimization degenerate inputs return the center") {
    const std::vector<double> c{0.5, 0.3, 0.2};
    const EbcRegion zero = make_region(c, 0.0, 0.0);
    CHECK(linear_min_over_ebc(std::vector<double>{1.0, -2.0, 0.5}, zero) == c);
    const EbcRegion r = make_region(c, 0.0, 0.2);
    const auto p = linear_min_over_ebc(std::vector<double>{3.0, 3.0, 3.0}, r);
    for (std::size_t m = 0; m < 3; ++m) CHECK(p[m] == doctest::Approx(c[m]));
  }

  TEST_CASE("make_regions alpha broadcasting") {
    const Instance inst = two_user_instance(0.9);
    const auto shared = make_regions(inst.profile, std::vector<double>{0.2});
    const auto per_user = make_regions(inst.profile, std::vector<double>{0.2, 0.2});
    REQUIRE(shared.size() == 2);
    CHECK(shared[1][1].radius == per_user[1][1].radius);
    CHECK_THROWS_AS((void)make_regions(inst.profile, std::vector<double>{0.1, 0.2, 0.3}),
                    std::invalid_argument);
  }

  TEST_CASE("zero radius leaves the problem unchanged") {
    const Instance inst = two_user_instance(0.9);
    const CostModel c = CostModel::quadratic();
    const ShapingResult r =
        shape_demand(inst.catalog, inst.profile, c, kEnumerate, std::vector<double>{0.0});
    CHECK(r.trace.iterates.size() == 1);
    CHECK(r.trace.converged);
    for (std::size_t n = 0; n < 2; ++n) {
      for (std::ptrdiff_t t = 0; t < 2; ++t) {
        for (std::size_t m = 0; m < 3; ++m) {
          CHECK(r.p.prob(n, t, m) == inst.profile.prob(n, t, m));
        }
      }
    }
    const SolveResult x = solve_proactive(inst.catalog, inst.profile, c, kEnumerate);
    CHECK(r.trace.iterates[0].f0 == doctest::Approx(x.cost.value).epsilon(1e-12));
  }

  TEST_CASE("two-user quadratic shaping lands on the ball boundary") {
    const Instance inst = two_user_instance(0.9);
    const CostModel c = CostModel::quadratic();
    const ShapingResult r =
        shape_demand(inst.catalog, inst.profile, c, kEnumerate, std::vector<double>{0.2});
    REQUIRE(r.trace.converged);
    const auto regions = make_regions(inst.profile, std::vector<double>{0.2});
    const BoundaryReport b = boundary_check(r.p, regions);
    for (std::size_t n = 0; n < 2; ++n) {
      const auto pi =
          ConditionalProfile::from(inst.profile.row(n, 1), inst.profile.silence(n, 1)).pi;
      const auto hat = ConditionalProfile::from(r.p.row(n, 1), r.p.silence(n, 1)).pi;
      CHECK(std::abs(dist(pi, hat) - 0.2 * entropy(pi)) <= 1e-3);
      CHECK(b.residual[n * 2 + 1] <= 1e-3);
    }
    const auto hat1 = ConditionalProfile::from(r.p.row(0, 1), 0.1).pi;
    const std::vector<double> published{0.8772, 0.1222, 0.0006};
    for (std::size_t m = 0; m < 3; ++m) CHECK(std::abs(hat1[m] - published[m]) <= 0.02);
  }

  TEST_CASE("shaping descends, stays feasible and ends stationary") {
    std::mt19937_64 rng(91);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t N = 1 + trial % 2;
      const std::size_t T = 1 + trial % 3;
      const std::size_t M = 2 + trial % 2;
      const ItemCatalog s(oracle::random_sizes(rng, M, 1.0, 4.0));
      const DemandProfile p = oracle::random_profile(rng, N, T, M);
      const CostModel c = trial % 2 == 0 ? CostModel::quadratic()
                                         : CostModel::outage(4.5 * static_cast<double>(N) + 1.0);
      const std::vector<double> alpha{0.15};
      const ShapingResult r = shape_demand(s, p, c, kEnumerate, alpha);
      REQUIRE(r.trace.iterates.size() >= 2);
      CHECK(r.trace.converged);
      const auto& it = r.trace.iterates;
      CHECK(it.back().f0 < it.front().f0);
      for (std::size_t k = 1; k + 1 < it.size(); ++k) CHECK(it[k].f0 < it[k - 1].f0);
      CHECK(it.back().f0 <= it[it.size() - 2].f0 + 1e-12 * (1.0 + std::abs(it.back().f0)));

      const auto regions = make_regions(p, alpha);
      const CycleArray g = cost_gradient_p(s, r.p, r.x, c, kEnumerate);
      for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t t = 0; t < T; ++t) {
          const auto ts = static_cast<std::ptrdiff_t>(t);
          const auto row = r.p.row(n, ts);
          CHECK(regions[n][t].contains(row, 1e-9));
          for (double v : row) CHECK(v >= 0.0);
          std::vector<double> gr(M);
          for (std::size_t m = 0; m < M; ++m) gr[m] = g(n, ts, m);
          const auto again = linear_min_over_ebc(gr, regions[n][t]);
          for (std::size_t m = 0; m < M; ++m) CHECK(std::abs(again[m] - row[m]) <= 1e-6);
        }
      }
    }
  }

  TEST_CASE("outage shaping descends to a boundary point") {
    const Instance inst = two_user_instance(0.9);
    const CostModel c = two_user_cost(CostKind::outage);
    const ShapingResult r =
        shape_demand(inst.catalog, inst.profile, c, kEnumerate, std::vector<double>{0.2});
    CHECK(r.trace.converged);
    const auto& it = r.trace.iterates;
    for (std::size_t k = 1; k < it.size(); ++k) {
      CHECK(it[k].f0 <= it[k - 1].f0 + 1e-12 * (1.0 + std::abs(it[k].f0)));
    }
    CHECK(it.back().f0 < it.front().f0);
    CHECK(it.back().max_boundary_residual <= 1e-3);
  }

  TEST_CASE("shaping needs exact gradients") {
    const Instance inst = two_user_instance(0.5);
    CHECK_THROWS_AS((void)shape_demand(inst.catalog, inst.profile, CostModel::quadratic(),
                                       EvalConfig{Engine::monte_carlo, 1000},
                                       std::vector<double>{0.2}),
                    UnsupportedEngine);
  }

  TEST_CASE("boundary check flags balls that leave the simplex") {
    DemandProfile p(1, 1, 3);
    p.set_row(0, 0, std::vector<double>{0.9, 0.05, 0.05});
    const auto regions = make_regions(p, std::vector<double>{0.5});
    CHECK_FALSE(regions[0][0].interior());
    const BoundaryReport b = boundary_check(p, regions);
    CHECK_FALSE(b.hypothesis[0]);
    CHECK(b.residual[0] == doctest::Approx(regions[0][0].radius));
    CHECK(b.passes(1e-3));

    const auto zero = make_regions(p, std::vector<double>{0.0});
    const BoundaryReport z = boundary_check(p, zero);
    CHECK(z.residual[0] == 0.0);
  }

  TEST_CASE("shaping gain condition") {
    const ItemCatalog s({3.0, 2.0, 4.0});
    const std::vector<double> original{0.72, 0.09, 0.09};
    const std::vector<double> zero(3, 0.0);
    CHECK(shaping_gain_condition(s, original, original, zero) == 0.0);

    const std::vector<double> moved{0.72, 0.18, 0.0};
    CHECK(shaping_gain_condition(s, original, moved, zero) ==
          doctest::Approx((4.0 - 2.0) * 0.09));

    const Instance inst = two_user_instance(0.9);
    const DemandProfile star = fully_flexible_optimum(inst.catalog, inst.profile);
    const CostModel c = CostModel::quadratic();
    const ActiveSets sets = active_sets(inst.catalog, inst.profile, c, kEnumerate);
    const PolicyA policy = policy_a(inst.catalog, inst.profile, c, kEnumerate, sets);
    for (std::size_t n = 0; n < 2; ++n) {
      std::vector<double> x(3);
      for (std::size_t m = 0; m < 3; ++m) x[m] = policy.x(n, 1, m);
      CHECK(shaping_gain_condition(inst.catalog, inst.profile.row(n, 1), star.row(n, 1), x) >
            0.0);
    }
  }
}
