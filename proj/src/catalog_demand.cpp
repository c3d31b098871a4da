#include "proshape/catalog_demand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace proshape {

ItemCatalog::ItemCatalog(std::vector<double> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) {
    throw std::invalid_argument("catalog needs at least one item");
  }
  for (std::size_t m = 0; m < sizes_.size(); ++m) {
    if (!(sizes_[m] > 0.0) || !std::isfinite(sizes_[m])) {
      throw std::invalid_argument(
          fmt::format("item {} has invalid size {}", m + 1, sizes_[m]));
    }
  }
  const auto [lo, hi] = std::minmax_element(sizes_.begin(), sizes_.end());
  s_min_ = *lo;
  s_max_ = *hi;
}

std::vector<double> random_integer_sizes(std::size_t count, int lo, int hi,
                                         const CounterRng& rng) {
  if (hi < lo) throw std::invalid_argument("size range is empty");
  constexpr std::uint32_t kCatalogStream = 0xFFFFFFFFu;
  const double span = static_cast<double>(hi - lo + 1);
  std::vector<double> sizes(count);
  for (std::size_t m = 0; m < count; ++m) {
    const double u = rng.uniform(kCatalogStream, 0, m);
    sizes[m] = static_cast<double>(lo) + std::floor(u * span);
  }
  return sizes;
}

DemandProfile::DemandProfile(std::size_t users, std::size_t slots,
                             std::size_t items)
    : users_(users),
      slots_(slots),
      items_(items),
      probs_(users * slots * items, 0.0),
      silence_(users * slots, 1.0) {
  if (slots == 0) throw std::invalid_argument("cycle length must be >= 1");
  if (items == 0) throw std::invalid_argument("profile needs >= 1 item");
}

void DemandProfile::set_row(std::size_t n, std::size_t t,
                            std::span<const double> p) {
  set_row(n, t, p, 1.0 - std::accumulate(p.begin(), p.end(), 0.0));
}

void DemandProfile::set_row(std::size_t n, std::size_t t,
                            std::span<const double> p, double q) {
  if (n >= users_ || t >= slots_) throw std::out_of_range("profile row");
  if (p.size() != items_) {
    throw std::invalid_argument(fmt::format(
        "row ({}, {}) has {} entries, expected {}", n, t, p.size(), items_));
  }
  std::copy(p.begin(), p.end(), probs_.begin() + index(n, t) * items_);
  silence_[index(n, t)] = q;
}

std::vector<ProfileViolation> validate_profile(const DemandProfile& profile) {
  using Kind = ProfileViolation::Kind;
  std::vector<ProfileViolation> out;
  for (std::size_t n = 0; n < profile.users(); ++n) {
    for (std::size_t t = 0; t < profile.slots(); ++t) {
      const auto row = profile.row(n, t);
      const double q = profile.silence(n, t);
      double sum = 0.0;
      for (std::size_t m = 0; m < row.size(); ++m) {
        sum += row[m];
        if (!(row[m] >= 0.0)) {
          out.push_back({Kind::negative_probability, n, t, m, row[m],
                         fmt::format("p[{}][{}][{}] = {} is negative", n, t,
                                     m, row[m])});
        }
      }
      if (!(q >= 0.0 && q <= 1.0)) {
        out.push_back({Kind::silence_range, n, t, std::nullopt, q,
                       fmt::format("q[{}][{}] = {} outside [0,1]", n, t, q)});
      }
      const double gap = std::abs(sum + q - 1.0);
      if (!(gap <= kProbabilityTolerance)) {
        out.push_back({Kind::sum_rule, n, t, std::nullopt, gap,
                       fmt::format("p[{}][{}] sums to {} with q = {} (total {})",
                                   n, t, sum, q, sum + q)});
      }
    }
  }
  return out;
}

DemandProfile normalize_profile(const DemandProfile& profile,
                                std::vector<std::string>* warnings) {
  DemandProfile out = profile;
  for (const auto& v : validate_profile(profile)) {
    if (v.kind != ProfileViolation::Kind::sum_rule ||
        v.value > kRenormalizeTolerance) {
      throw std::invalid_argument("invalid demand profile: " + v.message);
    }
    const auto row = profile.row(v.user, v.slot);
    const double q = profile.silence(v.user, v.slot);
    const double total = std::accumulate(row.begin(), row.end(), 0.0) + q;
    std::vector<double> scaled(row.begin(), row.end());
    for (double& x : scaled) x /= total;
    out.set_row(v.user, v.slot, scaled, q / total);
    if (warnings != nullptr) {
      warnings->push_back("renormalized " + v.message);
    }
  }
  return out;
}

std::vector<double> zipf_profile(std::size_t items, double power,
                                 double activity) {
  if (items == 0) throw std::invalid_argument("zipf: items must be >= 1");
  if (!(power > 0.0)) throw std::invalid_argument("zipf: power must be > 0");
  if (!(activity >= 0.0 && activity <= 1.0)) {
    throw std::invalid_argument(
        fmt::format("zipf: activity {} outside [0,1]", activity));
  }
  std::vector<double> p(items);
  double norm = 0.0;
  for (std::size_t m = 0; m < items; ++m) {
    p[m] = std::pow(static_cast<double>(m + 1), -power);
    norm += p[m];
  }
  for (double& x : p) x *= activity / norm;
  return p;
}

ConditionalProfile ConditionalProfile::from(std::span<const double> p,
                                            double q) {
  if (!(q < 1.0)) {
    throw std::invalid_argument("conditional profile undefined for q = 1");
  }
  ConditionalProfile c{std::vector<double>(p.begin(), p.end())};
  for (double& x : c.pi) x /= 1.0 - q;
  return c;
}

double entropy(std::span<const double> pi) {
  double h = 0.0;
  for (double x : pi) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

std::size_t pick_choice(std::span<const double> probs, double u) {
  double cumulative = 0.0;
  for (std::size_t m = 0; m < probs.size(); ++m) {
    cumulative += probs[m];
    if (u < cumulative) return m + 1;
  }
  return 0;
}

std::size_t sample_choice(const DemandProfile& profile, std::size_t n,
                          std::size_t t, const CounterRng& rng,
                          std::uint64_t index) {
  const double u = rng.uniform(static_cast<std::uint32_t>(n),
                               static_cast<std::uint32_t>(t), index);
  return pick_choice(profile.row(n, t), u);
}

RequestOutcome sample_outcome(const DemandProfile& profile, std::size_t t,
                              const CounterRng& rng, std::uint64_t index) {
  RequestOutcome out;
  out.choice.resize(profile.users());
  for (std::size_t n = 0; n < profile.users(); ++n) {
    out.choice[n] = sample_choice(profile, n, profile.wrap(t), rng, index);
  }
  return out;
}

}  // namespace proshape
