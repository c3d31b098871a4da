#include <doctest.h>

#include <cmath>

#include "proshape/rng.hpp"

using proshape::CounterRng;

TEST_SUITE("rng") {
  TEST_CASE("philox4x32-10 known answers") {
    // Reference vectors published with the Random123 library.
    const CounterRng zero(0);
    CHECK(zero.generate({0, 0, 0, 0}) ==
          CounterRng::Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});

    const CounterRng ones(0xffffffffffffffffULL);
    CHECK(ones.generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}) ==
          CounterRng::Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});

    const CounterRng pi(0x299f31d0a4093822ULL);
    CHECK(pi.generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}) ==
          CounterRng::Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
  }

  TEST_CASE("uniform draws are pure functions of their address") {
    const CounterRng a(42);
    const CounterRng b(42);
    CHECK(a.uniform(3, 1, 99) == b.uniform(3, 1, 99));
    CHECK(a.uniform(3, 1, 99) != a.uniform(3, 1, 100));
    CHECK(a.uniform(3, 1, 99) != a.uniform(4, 1, 99));
    CHECK(a.uniform(3, 1, 99) != CounterRng(43).uniform(3, 1, 99));
    CHECK(a.seed() == 42);
  }

  TEST_CASE("uniform draws lie in [0,1) with the right first two moments") {
    const CounterRng rng(7);
    constexpr int K = 200000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int k = 0; k < K; ++k) {
      const double u = rng.uniform(0, 0, static_cast<std::uint64_t>(k));
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
      sum2 += u * u;
    }
    const double mean = sum / K;
    const double var = sum2 / K - mean * mean;
    CHECK(std::abs(mean - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / K));
    CHECK(std::abs(var - 1.0 / 12.0) < 2e-3);
  }
}
