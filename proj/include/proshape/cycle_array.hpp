#pragma once

#include <cstddef>
#include <vector>

namespace proshape {

/// Dense users x slots x items array over one cycle; slot indices wrap.
class CycleArray {
 public:
  CycleArray() = default;
  CycleArray(std::size_t users, std::size_t slots, std::size_t items,
             double fill = 0.0)
      : users_(users), slots_(slots), items_(items),
        data_(users * slots * items, fill) {}

  [[nodiscard]] std::size_t users() const noexcept { return users_; }
  [[nodiscard]] std::size_t slots() const noexcept { return slots_; }
  [[nodiscard]] std::size_t items() const noexcept { return items_; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

  [[nodiscard]] double& operator()(std::size_t n, std::ptrdiff_t t,
                                   std::size_t m) {
    return data_[offset(n, t, m)];
  }
  [[nodiscard]] double operator()(std::size_t n, std::ptrdiff_t t,
                                  std::size_t m) const {
    return data_[offset(n, t, m)];
  }

  [[nodiscard]] std::vector<double>& flat() noexcept { return data_; }
  [[nodiscard]] const std::vector<double>& flat() const noexcept {
    return data_;
  }

  [[nodiscard]] std::size_t offset(std::size_t n, std::ptrdiff_t t,
                                   std::size_t m) const noexcept {
    const auto T = static_cast<std::ptrdiff_t>(slots_);
    const auto w = static_cast<std::size_t>(((t % T) + T) % T);
    return (n * slots_ + w) * items_ + m;
  }

  friend bool operator==(const CycleArray&, const CycleArray&) = default;

 private:
  std::size_t users_ = 0;
  std::size_t slots_ = 1;
  std::size_t items_ = 0;
  std::vector<double> data_;
};

}  // namespace proshape
