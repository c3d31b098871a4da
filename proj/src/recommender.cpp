#include "proshape/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace proshape {

std::vector<double> PreferenceMapping::apply(std::span<const double> v,
                                             double q) const {
  switch (kind) {
    case Kind::linear_fractional: {
      std::vector<double> p(v.size(), 0.0);
      if (q >= 1.0) return p;
      const double total = std::accumulate(v.begin(), v.end(), 0.0);
      if (!(total > 0.0)) {
        throw std::domain_error(
            "linear-fractional mapping undefined for all-zero ratings");
      }
      for (std::size_t m = 0; m < v.size(); ++m) {
        p[m] = (1.0 - q) * v[m] / total;
      }
      return p;
    }
  }
  throw std::logic_error("unknown preference mapping");
}

std::vector<double> verify_mapping(std::span<const double> v,
                                   const PreferenceMapping& mapping, double q) {
  return mapping.apply(v, q);
}

RatingResult solve_rating(std::span<const double> target, double q,
                          std::span<const double> ratings,
                          const PreferenceMapping& mapping) {
  if (mapping.kind != PreferenceMapping::Kind::linear_fractional) {
    throw std::invalid_argument("solve_rating supports linear_fractional only");
  }
  if (target.size() != ratings.size() || target.empty()) {
    throw std::invalid_argument(fmt::format(
        "target has {} items, ratings {}", target.size(), ratings.size()));
  }
  for (std::size_t m = 0; m < ratings.size(); ++m) {
    if (!(ratings[m] >= 0.0 && ratings[m] <= 1.0)) {
      throw std::invalid_argument(
          fmt::format("rating {} = {} outside [0,1]", m + 1, ratings[m]));
    }
    if (!(target[m] >= 0.0)) {
      throw std::invalid_argument(
          fmt::format("target {} = {} is negative", m + 1, target[m]));
    }
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument(fmt::format("silence {} outside [0,1]", q));
  }

  RatingResult out;
  if (q >= 1.0) {
    out.v.assign(ratings.begin(), ratings.end());
    out.unconstrained = true;
    return out;
  }
  const double mass = std::accumulate(target.begin(), target.end(), 0.0);
  if (std::abs(mass - (1.0 - q)) > 1e-9) {
    throw std::invalid_argument(fmt::format(
        "target sums to {} but 1 - q = {}", mass, 1.0 - q));
  }
  std::vector<double> pi(target.begin(), target.end());
  for (double& x : pi) x /= 1.0 - q;

  const double along = std::inner_product(pi.begin(), pi.end(),
                                          ratings.begin(), 0.0);
  const double norm2 = std::inner_product(pi.begin(), pi.end(), pi.begin(), 0.0);
  if (!(along > 0.0)) {
    throw std::domain_error(
        "ratings are orthogonal to the target profile; no closest "
        "positive rating exists");
  }
  const double cap = 1.0 / *std::max_element(pi.begin(), pi.end());
  out.scale = along / norm2;
  if (out.scale >= cap) {
    out.scale = cap;
    out.clamped = true;
  }
  const double top = *std::max_element(pi.begin(), pi.end());
  out.v.resize(pi.size());
  for (std::size_t m = 0; m < pi.size(); ++m) {
    out.v[m] = (out.clamped && pi[m] == top) ? 1.0
                                             : std::min(1.0, out.scale * pi[m]);
  }
  return out;
}

}  // namespace proshape
