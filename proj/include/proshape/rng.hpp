#pragma once

#include <array>
#include <cstdint>

namespace proshape {

/// Philox4x32-10 counter-based generator.
///
/// Every draw is a pure function of (key, counter), so a stream can be
/// addressed directly by (user, slot, sample) without any shared state.
class CounterRng {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit CounterRng(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)} {}

  [[nodiscard]] Block generate(Block counter) const noexcept;

  /// Uniform double in [0, 1) with 53 random bits, keyed by a 4-word address.
  [[nodiscard]] double uniform(std::uint32_t a, std::uint32_t b,
                               std::uint64_t index) const noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept {
    return static_cast<std::uint64_t>(key_[0]) |
           (static_cast<std::uint64_t>(key_[1]) << 32);
  }

 private:
  std::array<std::uint32_t, 2> key_;
};

}  // namespace proshape
