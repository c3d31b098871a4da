#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proshape/rng.hpp"

namespace proshape {

/// Item sizes in data units. Immutable after construction.
class ItemCatalog {
 public:
  explicit ItemCatalog(std::vector<double> sizes);

  [[nodiscard]] std::size_t size() const noexcept { return sizes_.size(); }
  [[nodiscard]] double operator[](std::size_t m) const { return sizes_[m]; }
  [[nodiscard]] std::span<const double> sizes() const noexcept { return sizes_; }
  [[nodiscard]] double s_min() const noexcept { return s_min_; }
  [[nodiscard]] double s_max() const noexcept { return s_max_; }

 private:
  std::vector<double> sizes_;
  double s_min_;
  double s_max_;
};

/// `count` sizes drawn uniformly from the integers lo..hi (inclusive) on a
/// substream of `rng` reserved for catalogs.
[[nodiscard]] std::vector<double> random_integer_sizes(std::size_t count,
                                                       int lo, int hi,
                                                       const CounterRng& rng);

/// One period of per-user, per-slot request probabilities.
///
/// Storage is N x T x M for the probabilities and N x T for the silence
/// probability. Slot indices wrap modulo T. The type does not enforce the sum
/// rule; use validate_profile() / normalize_profile() for that.
class DemandProfile {
 public:
  DemandProfile() = default;
  /// All users silent in every slot.
  DemandProfile(std::size_t users, std::size_t slots, std::size_t items);

  [[nodiscard]] std::size_t users() const noexcept { return users_; }
  [[nodiscard]] std::size_t slots() const noexcept { return slots_; }
  [[nodiscard]] std::size_t items() const noexcept { return items_; }

  [[nodiscard]] std::size_t wrap(std::ptrdiff_t t) const noexcept {
    const auto T = static_cast<std::ptrdiff_t>(slots_);
    return static_cast<std::size_t>(((t % T) + T) % T);
  }

  [[nodiscard]] double prob(std::size_t n, std::ptrdiff_t t,
                            std::size_t m) const {
    return probs_[index(n, wrap(t)) * items_ + m];
  }
  [[nodiscard]] double silence(std::size_t n, std::ptrdiff_t t) const {
    return silence_[index(n, wrap(t))];
  }
  [[nodiscard]] std::span<const double> row(std::size_t n,
                                            std::ptrdiff_t t) const {
    return {probs_.data() + index(n, wrap(t)) * items_, items_};
  }

  /// Sets p_{n,t} and derives q_{n,t} = 1 - sum(p).
  void set_row(std::size_t n, std::size_t t, std::span<const double> p);
  /// Sets p_{n,t} and q_{n,t} as given, unchecked.
  void set_row(std::size_t n, std::size_t t, std::span<const double> p,
               double q);

 private:
  [[nodiscard]] std::size_t index(std::size_t n, std::size_t t) const {
    return n * slots_ + t;
  }

  std::size_t users_ = 0;
  std::size_t slots_ = 1;
  std::size_t items_ = 0;
  std::vector<double> probs_;
  std::vector<double> silence_;
};

inline constexpr double kProbabilityTolerance = 1e-12;
inline constexpr double kRenormalizeTolerance = 1e-9;

struct ProfileViolation {
  enum class Kind { negative_probability, sum_rule, silence_range, shape };
  Kind kind;
  std::size_t user = 0;
  std::size_t slot = 0;
  std::optional<std::size_t> item;
  double value = 0.0;  ///< offending entry, or |sum + q - 1| for the sum rule
  std::string message;
};

/// Every violated invariant, with coordinates. Empty means valid.
[[nodiscard]] std::vector<ProfileViolation> validate_profile(
    const DemandProfile& profile);

/// Returns a profile satisfying the sum rule to 1e-12. Rows whose sum rule is
/// off by at most 1e-9 are rescaled (and reported through `warnings`); any
/// other violation throws std::invalid_argument listing the first problem.
[[nodiscard]] DemandProfile normalize_profile(
    const DemandProfile& profile, std::vector<std::string>* warnings = nullptr);

/// p(m) = activity * G / m^power, G normalizing over m = 1..items.
[[nodiscard]] std::vector<double> zipf_profile(std::size_t items, double power,
                                               double activity);

/// Request distribution given that the user requests something.
struct ConditionalProfile {
  std::vector<double> pi;

  /// Throws std::invalid_argument when q >= 1 (conditional undefined).
  static ConditionalProfile from(std::span<const double> p, double q);
};

/// Shannon entropy in nats, with 0 log 0 = 0.
[[nodiscard]] double entropy(std::span<const double> pi);

/// One slot's realization: choice[n] = 0 for silence, m in 1..M for item m.
struct RequestOutcome {
  std::vector<std::size_t> choice;
};

/// Item chosen (1-based) by inverting the cumulative of `probs` at u, or 0
/// for silence.
[[nodiscard]] std::size_t pick_choice(std::span<const double> probs, double u);

/// Draws user n's choice in slot t for sample `index` from its own substream.
[[nodiscard]] std::size_t sample_choice(const DemandProfile& profile,
                                        std::size_t n, std::size_t t,
                                        const CounterRng& rng,
                                        std::uint64_t index);

[[nodiscard]] RequestOutcome sample_outcome(const DemandProfile& profile,
                                            std::size_t t,
                                            const CounterRng& rng,
                                            std::uint64_t index);

}  // namespace proshape
