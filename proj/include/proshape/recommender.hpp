#pragma once

#include <span>
#include <vector>

namespace proshape {

/// Rating-to-profile map phi. Only the linear-fractional form
///   phi_m(v) = (1 - q) v_m / sum_j v_j
/// is implemented; other kinds plug in here.
struct PreferenceMapping {
  enum class Kind { linear_fractional };
  Kind kind = Kind::linear_fractional;

  /// Throws std::domain_error when sum v = 0 and q < 1.
  [[nodiscard]] std::vector<double> apply(std::span<const double> v,
                                          double q) const;
};

struct RatingResult {
  std::vector<double> v;
  double scale = 0.0;          ///< v = scale * target / (1 - q)
  bool clamped = false;        ///< scale hit 1 / max component
  bool unconstrained = false;  ///< q = 1: any rating realizes the target
};

/// Ratings in [0,1]^M closest to `ratings` that the mapping turns into
/// `target`. For the linear-fractional map the feasible set is
/// {s pi : 0 < s <= 1 / max pi} with pi = target / (1 - q), so the answer is
/// the clamped 1-D projection s* = <pi, r> / |pi|^2.
/// Throws std::invalid_argument on malformed input and std::domain_error
/// when <pi, r> = 0 (the infimum s -> 0 is not attained).
[[nodiscard]] RatingResult solve_rating(std::span<const double> target,
                                        double q,
                                        std::span<const double> ratings,
                                        const PreferenceMapping& mapping = {});

/// The profile a rating vector induces; round-trip check for solve_rating.
[[nodiscard]] std::vector<double> verify_mapping(
    std::span<const double> v, const PreferenceMapping& mapping, double q);

}  // namespace proshape
