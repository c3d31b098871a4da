#pragma once

#include <cstddef>
#include <vector>

#include "proshape/catalog_demand.hpp"
#include "proshape/cost_model.hpp"
#include "proshape/cycle_array.hpp"
#include "proshape/slot_expectation.hpp"

namespace proshape {

/// Proactive download portions x_{n,t}(m): data of item m delivered to user n
/// during slot t-1 ahead of a possible request in slot t. One cycle stored;
/// x_{n,T} is x_{n,0}.
class ProactiveAllocation {
 public:
  ProactiveAllocation() = default;
  /// Zero allocation.
  ProactiveAllocation(std::size_t users, std::size_t slots, std::size_t items)
      : x_(users, slots, items) {}
  explicit ProactiveAllocation(CycleArray x) : x_(std::move(x)) {}

  static ProactiveAllocation zeros_like(const DemandProfile& profile) {
    return {profile.users(), profile.slots(), profile.items()};
  }

  [[nodiscard]] std::size_t users() const noexcept { return x_.users(); }
  [[nodiscard]] std::size_t slots() const noexcept { return x_.slots(); }
  [[nodiscard]] std::size_t items() const noexcept { return x_.items(); }

  [[nodiscard]] double operator()(std::size_t n, std::ptrdiff_t t,
                                  std::size_t m) const {
    return x_(n, t, m);
  }
  [[nodiscard]] double& operator()(std::size_t n, std::ptrdiff_t t,
                                   std::size_t m) {
    return x_(n, t, m);
  }

  [[nodiscard]] const CycleArray& array() const noexcept { return x_; }
  [[nodiscard]] CycleArray& array() noexcept { return x_; }

  /// Total prefetched for slot t, summed over users and items.
  [[nodiscard]] double slot_total(std::ptrdiff_t t) const;

  /// Throws std::invalid_argument unless 0 <= x <= S(m) everywhere and the
  /// shape matches the profile.
  void check(const ItemCatalog& catalog, const DemandProfile& profile) const;

 private:
  CycleArray x_;
};

/// Realized slot-t load with proactive downloads:
///   Y_t = sum_n (S(m_n) - x_{n,t}(m_n)) 1{n requested m_n} + sum_{n,m} x_{n,t+1}(m).
[[nodiscard]] double slot_load(const ItemCatalog& catalog,
                               const RequestOutcome& outcome,
                               const ProactiveAllocation& alloc,
                               std::ptrdiff_t t);

/// Distribution of Y_t as independent per-user terms.
[[nodiscard]] SlotLoad proactive_slot_load(const ItemCatalog& catalog,
                                           const DemandProfile& profile,
                                           const ProactiveAllocation& alloc,
                                           std::size_t t);

/// E[C(Y_t)] for each slot of the cycle.
[[nodiscard]] std::vector<Estimate> slot_costs(const ItemCatalog& catalog,
                                               const DemandProfile& profile,
                                               const ProactiveAllocation& alloc,
                                               const CostModel& cost,
                                               const EvalConfig& cfg);

/// (1/T) sum_t E[C(Y_t)].
[[nodiscard]] Estimate expected_cycle_cost(const ItemCatalog& catalog,
                                           const DemandProfile& profile,
                                           const ProactiveAllocation& alloc,
                                           const CostModel& cost,
                                           const EvalConfig& cfg);

/// Baseline cost with no proactive downloads.
[[nodiscard]] Estimate nonproactive_cost(const ItemCatalog& catalog,
                                         const DemandProfile& profile,
                                         const CostModel& cost,
                                         const EvalConfig& cfg);

/// Per-coordinate derivative with its Monte Carlo standard error.
struct CycleGradient {
  CycleArray value;
  CycleArray std_error;
};

/// d/dx_{n,t}(m) of expected_cycle_cost:
///   (1/T) (E[C'(Y_{t-1})] - E[I_{n,t}(m) C'(Y_t)]).
/// Monte Carlo uses the pathwise derivative of each sample.
[[nodiscard]] CycleGradient cost_gradient_x(const ItemCatalog& catalog,
                                            const DemandProfile& profile,
                                            const ProactiveAllocation& alloc,
                                            const CostModel& cost,
                                            const EvalConfig& cfg);

/// d/dp_{n,t}(m) of expected_cycle_cost with q_{n,t} absorbing the change:
///   (1/T) (E[C(Y_t) | n requests m] - E[C(Y_t) | n silent]).
/// Exact engines only; throws UnsupportedEngine for Monte Carlo.
[[nodiscard]] CycleArray cost_gradient_p(const ItemCatalog& catalog,
                                         const DemandProfile& profile,
                                         const ProactiveAllocation& alloc,
                                         const CostModel& cost,
                                         const EvalConfig& cfg);

}  // namespace proshape
