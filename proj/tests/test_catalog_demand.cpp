#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracle.hpp"
#include "proshape/catalog_demand.hpp"
#include "proshape/experiments.hpp"

using namespace proshape;

TEST_SUITE("catalog_demand") {
  TEST_CASE("catalog caches extremes and rejects bad sizes") {
    const ItemCatalog c({3.0, 2.0, 4.0});
    CHECK(c.size() == 3);
    CHECK(c.s_min() == 2.0);
    CHECK(c.s_max() == 4.0);
    CHECK_THROWS_AS(ItemCatalog(std::vector<double>{}), std::invalid_argument);
    CHECK_THROWS_AS(ItemCatalog(std::vector<double>{1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(ItemCatalog(std::vector<double>{1.0, -2.0}), std::invalid_argument);
    CHECK_THROWS_AS(ItemCatalog(std::vector<double>{INFINITY}), std::invalid_argument);
  }

  TEST_CASE("validate_profile accepts valid rows and reports violations") {
    DemandProfile p(1, 3, 3);
    p.set_row(0, 0, std::vector<double>{0.08, 0.01, 0.01});
    p.set_row(0, 1, std::vector<double>{0.0, 0.0, 0.0});
    CHECK(p.silence(0, 0) == doctest::Approx(0.9));
    CHECK(p.silence(0, 1) == 1.0);
    p.set_row(0, 2, std::vector<double>{0.6, 0.6, 0.0}, 0.2);
    const auto v = validate_profile(p);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == ProfileViolation::Kind::sum_rule);
    CHECK(v[0].slot == 2);
    CHECK(v[0].value == doctest::Approx(0.4));

    DemandProfile neg(1, 1, 2);
    neg.set_row(0, 0, std::vector<double>{-0.1, 0.5}, 0.6);
    const auto vn = validate_profile(neg);
    REQUIRE(vn.size() == 1);
    CHECK(vn[0].kind == ProfileViolation::Kind::negative_probability);
    CHECK(vn[0].item == 0);

    DemandProfile silent(1, 1, 1);
    silent.set_row(0, 0, std::vector<double>{-0.5}, 1.5);
    const auto vs = validate_profile(silent);
    CHECK(vs.size() == 2);
  }

  TEST_CASE("normalize_profile rescales tiny gaps and rejects larger ones") {
    DemandProfile p(1, 1, 2);
    p.set_row(0, 0, std::vector<double>{0.5, 0.3}, 0.2 + 5e-10);
    std::vector<std::string> warnings;
    const DemandProfile fixed = normalize_profile(p, &warnings);
    CHECK(validate_profile(fixed).empty());
    CHECK(warnings.size() == 1);

    p.set_row(0, 0, std::vector<double>{0.5, 0.3}, 0.2 + 1e-6);
    CHECK_THROWS_AS((void)normalize_profile(p), std::invalid_argument);
  }

  TEST_CASE("slot indices wrap modulo the cycle") {
    DemandProfile p(1, 3, 1);
    p.set_row(0, 0, std::vector<double>{0.25});
    CHECK(p.prob(0, 3, 0) == 0.25);
    CHECK(p.prob(0, -3, 0) == 0.25);
    CHECK(p.wrap(-1) == 2);
    CHECK(p.wrap(7) == 1);
  }

  TEST_CASE("zipf profile values, sum and ordering") {
    const auto p = zipf_profile(3, 4.0, 1.0);
    const double g = 1.0 / (1.0 + 1.0 / 16.0 + 1.0 / 81.0);
    CHECK(p[0] == doctest::Approx(g).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(0.93037).epsilon(1e-5));
    CHECK(p[1] == doctest::Approx(0.05815).epsilon(1e-4));
    CHECK(p[2] == doctest::Approx(0.01149).epsilon(1e-3));

    CHECK(zipf_profile(1, 2.5, 0.5) == std::vector<double>{0.5});

    const auto flat = zipf_profile(2, 1e-9, 0.6);
    CHECK(flat[0] == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(flat[1] == doctest::Approx(0.3).epsilon(1e-6));

    for (double activity : {0.0, 0.01, 0.37, 1.0}) {
      const auto z = zipf_profile(50, 4.0, activity);
      CHECK(std::abs(std::accumulate(z.begin(), z.end(), 0.0) - activity) <=
            1e-12);
      if (activity > 0.0) {
        CHECK(std::is_sorted(z.rbegin(), z.rend()));
        CHECK(std::adjacent_find(z.begin(), z.end()) == z.end());
      }
    }
    CHECK_THROWS_AS((void)zipf_profile(3, 4.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS((void)zipf_profile(3, 4.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS((void)zipf_profile(3, 0.0, 0.5), std::invalid_argument);
  }

  TEST_CASE("conditional profile and entropy") {
    const std::vector<double> p{0.08, 0.01, 0.01};
    const auto c = ConditionalProfile::from(p, 0.9);
    CHECK(c.pi[0] == doctest::Approx(0.8));
    CHECK(std::accumulate(c.pi.begin(), c.pi.end(), 0.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS((void)ConditionalProfile::from(p, 1.0), std::invalid_argument);

    const double direct = -(0.8 * std::log(0.8) + 2 * 0.1 * std::log(0.1));
    CHECK(entropy(std::vector<double>{0.8, 0.1, 0.1}) ==
          doctest::Approx(direct).epsilon(1e-14));
    CHECK(entropy(std::vector<double>{0.8, 0.1, 0.1}) ==
          doctest::Approx(0.6390).epsilon(1e-4));
    CHECK(entropy(std::vector<double>{1.0, 0.0, 0.0}) == 0.0);
    CHECK(entropy(std::vector<double>{1.0 / 3, 1.0 / 3, 1.0 / 3}) ==
          doctest::Approx(std::log(3.0)).epsilon(1e-14));
  }

  TEST_CASE("entropy properties on random distributions") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      const std::size_t M = 2 + trial % 6;
      std::vector<double> pi(M);
      double sum = 0.0;
      for (double& v : pi) {
        v = u(rng);
        sum += v;
      }
      for (double& v : pi) v /= sum;
      const double h = entropy(pi);
      CHECK(h > 0.0);
      CHECK(h <= std::log(static_cast<double>(M)) + 1e-12);
      std::shuffle(pi.begin(), pi.end(), rng);
      CHECK(entropy(pi) == doctest::Approx(h).epsilon(1e-12));
    }
  }

  TEST_CASE("deterministic rows sample deterministically") {
    DemandProfile p(2, 1, 3);
    p.set_row(0, 0, std::vector<double>{1.0, 0.0, 0.0});
    const CounterRng rng(5);
    for (std::uint64_t k = 0; k < 1000; ++k) {
      const auto o = sample_outcome(p, 0, rng, k);
      CHECK(o.choice[0] == 1);
      CHECK(o.choice[1] == 0);
    }
  }

  TEST_CASE("peak-slot frequency of the two-user example") {
    const Instance inst = two_user_instance(0.9);
    const CounterRng rng(2024);
    constexpr std::uint64_t K = 1000000;
    std::uint64_t hits = 0;
    for (std::uint64_t k = 0; k < K; ++k) {
      hits += sample_choice(inst.profile, 0, 1, rng, k) == 1 ? 1 : 0;
    }
    const double freq = static_cast<double>(hits) / K;
    CHECK(std::abs(freq - 0.72) <= 3.0 * std::sqrt(0.72 * 0.28 / K));
  }

  TEST_CASE("empirical frequencies converge on every cell") {
    std::mt19937_64 gen(3);
    const DemandProfile p = oracle::random_profile(gen, 3, 2, 4);
    const CounterRng rng(77);
    constexpr std::uint64_t K = 100000;
    for (std::size_t t = 0; t < 2; ++t) {
      std::vector<std::vector<double>> count(3, std::vector<double>(5, 0.0));
      for (std::uint64_t k = 0; k < K; ++k) {
        const auto o = sample_outcome(p, t, rng, k);
        for (std::size_t n = 0; n < 3; ++n) count[n][o.choice[n]] += 1.0;
      }
      for (std::size_t n = 0; n < 3; ++n) {
        for (std::size_t c = 0; c <= 4; ++c) {
          const double prob = c == 0 ? p.silence(n, static_cast<std::ptrdiff_t>(t))
                                     : p.prob(n, static_cast<std::ptrdiff_t>(t), c - 1);
          const double freq = count[n][c] / K;
          CHECK(std::abs(freq - prob) <= 5.0 * std::sqrt(prob * (1 - prob) / K));
        }
      }
    }
  }

  TEST_CASE("sampling one user does not depend on the others") {
    DemandProfile a(2, 1, 2);
    a.set_row(0, 0, std::vector<double>{0.3, 0.3});
    a.set_row(1, 0, std::vector<double>{0.5, 0.1});
    DemandProfile b = a;
    b.set_row(1, 0, std::vector<double>{0.0, 0.9});
    const CounterRng rng(9);
    for (std::uint64_t k = 0; k < 500; ++k) {
      CHECK(sample_choice(a, 0, 0, rng, k) == sample_choice(b, 0, 0, rng, k));
    }
  }

  TEST_CASE("random integer sizes stay in range and depend on the seed") {
    const auto s = random_integer_sizes(500, 10, 30, CounterRng(7));
    for (double v : s) {
      CHECK(v >= 10.0);
      CHECK(v <= 30.0);
      CHECK(v == std::floor(v));
    }
    CHECK(*std::min_element(s.begin(), s.end()) == 10.0);
    CHECK(*std::max_element(s.begin(), s.end()) == 30.0);
    CHECK(s == random_integer_sizes(500, 10, 30, CounterRng(7)));
    CHECK(s != random_integer_sizes(500, 10, 30, CounterRng(8)));
  }
}
