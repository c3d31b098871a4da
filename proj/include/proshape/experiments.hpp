#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "proshape/demand_shape.hpp"
#include "proshape/proactive_opt.hpp"
#include "proshape/recommender.hpp"

namespace proshape {

/// Two users, three items of sizes (3, 2, 4), two slots. Slot 0 is off-peak
/// (activity p_off), slot 1 is peak (activity p_peak). Conditional
/// preferences are (0.8, 0.1, 0.1) and (0.3, 0.1, 0.6).
[[nodiscard]] Instance two_user_instance(double p_peak, double p_off = 0.1);

/// Original ratings of the two users (equal to their preferences).
[[nodiscard]] std::vector<std::vector<double>> two_user_ratings();

inline constexpr double kTwoUserCapacity = 9.8;

/// quadratic: C = L^2; outage: C = L / (9.8 - L).
[[nodiscard]] CostModel two_user_cost(CostKind kind);

/// M = 50 items with integer sizes uniform on 10..30 drawn from `seed`,
/// T = 8 slots with silence (0.9, 0.4, 0.01, 0.8, 0.2, 0.7, 0.05, 0.1),
/// Zipf power 4 preferences, all users identical.
[[nodiscard]] ScalingFamily zipf_cycle_family(std::uint64_t seed);

struct SweepPoint {
  double p_peak = 0.0;
  bool feasible = true;  ///< false when the load can exceed the capacity
  double c_nonproactive = 0.0;
  double c_proactive = 0.0;
  std::string note;
};

struct ShapedUser {
  std::size_t user = 0;
  std::vector<double> original;  ///< conditional profile at peak
  std::vector<double> shaped;    ///< conditional profile at peak
  double distance = 0.0;         ///< |original - shaped|
  double target = 0.0;           ///< alpha H(original)
  bool interior = false;         ///< ball strictly inside the simplex
  RatingResult rating;
};

struct TwoUserReport {
  CostKind kind = CostKind::quadratic;
  std::vector<SweepPoint> sweep;
  ShapingTrace trace;
  std::vector<ShapedUser> users;
};

/// Sweeps p_peak over 0.1..0.9 (step 0.1) for C^N and C^P, then shapes
/// demand at p_peak = 0.9 and computes the recommended ratings.
[[nodiscard]] TwoUserReport reproduce_two_user(CostKind kind,
                                               double alpha = kDefaultShapeAlpha,
                                               const ShapeOptions& opts = {});

[[nodiscard]] ScalingCurve reproduce_scaling(
    std::uint64_t seed, std::vector<std::size_t> ladder = {25, 50, 100, 200},
    const SolveOptions& opts = {});

}  // namespace proshape
