#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "proshape/catalog_demand.hpp"
#include "proshape/cost_model.hpp"

namespace proshape {

enum class Engine { enumerate, analytic_quadratic, monte_carlo };

[[nodiscard]] std::string to_string(Engine engine);
/// Parses "enumerate", "analytic_quadratic" or "monte_carlo".
[[nodiscard]] Engine parse_engine(const std::string& name);

struct EvalConfig {
  Engine engine = Engine::enumerate;
  std::size_t samples = 100000;  ///< Monte Carlo only
  std::uint64_t seed = 0;
};

/// Largest per-slot outcome count the enumerate engine accepts.
inline constexpr double kMaxEnumeratedOutcomes = 1e7;

class UnsupportedEngine : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws UnsupportedEngine when `cfg` cannot evaluate this instance size or
/// cost kind exactly as requested.
void check_engine(const EvalConfig& cfg, std::size_t users, std::size_t items,
                  const CostModel& cost);

/// A value with its Monte Carlo standard error (zero for exact engines).
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Load of one slot as a sum of independent per-user terms:
///   Y = additive + sum_n V_n,  V_n = value(n, m) w.p. prob(n, m), 0 w.p. silence(n).
struct SlotLoad {
  std::size_t slot = 0;  ///< addresses the RNG substream
  std::size_t users = 0;
  std::size_t items = 0;
  double additive = 0.0;
  std::vector<double> prob;
  std::vector<double> value;
  std::vector<double> silence;

  [[nodiscard]] double p(std::size_t n, std::size_t m) const {
    return prob[n * items + m];
  }
  [[nodiscard]] double v(std::size_t n, std::size_t m) const {
    return value[n * items + m];
  }
};

/// Non-proactive load of slot t: value(n, m) = S(m), no additive term.
[[nodiscard]] SlotLoad plain_slot_load(const ItemCatalog& catalog,
                                       const DemandProfile& profile,
                                       std::size_t t);

enum class Moment { cost, marginal };

/// E[g(Y)] where g is C or C'.
[[nodiscard]] Estimate expect(const SlotLoad& load, const CostModel& cost,
                              Moment moment, const EvalConfig& cfg);

/// Conditioning on user n: entry m (< items) is E[g(Y) | n requests m],
/// entry `items` is E[g(Y) | n silent]. The expectation runs over the other
/// users only. An entry for an item user n never requests is +inf when it
/// would leave the cost domain.
[[nodiscard]] std::vector<Estimate> expect_given_user(const SlotLoad& load,
                                                      std::size_t n,
                                                      const CostModel& cost,
                                                      Moment moment,
                                                      const EvalConfig& cfg);

/// expect_given_user() for every user; O(N M) for the analytic engine.
[[nodiscard]] std::vector<std::vector<Estimate>> expect_given_each_user(
    const SlotLoad& load, const CostModel& cost, Moment moment,
    const EvalConfig& cfg);

}  // namespace proshape
