#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "proshape/catalog_demand.hpp"
#include "proshape/cost_model.hpp"
#include "proshape/demand_shape.hpp"
#include "proshape/slot_expectation.hpp"

namespace proshape {

/// Schema or syntax problem in a scenario file. `path` is the JSON field
/// path (e.g. "cost.mu"); line and column are set for syntax errors.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string message, std::string path,
                std::optional<std::size_t> line = std::nullopt,
                std::optional<std::size_t> column = std::nullopt);

  [[nodiscard]] const std::string& path() const noexcept { return path_; }
  [[nodiscard]] std::optional<std::size_t> line() const noexcept {
    return line_;
  }
  [[nodiscard]] std::optional<std::size_t> column() const noexcept {
    return column_;
  }

 private:
  std::string path_;
  std::optional<std::size_t> line_;
  std::optional<std::size_t> column_;
};

/// Everything a run needs: catalog, one cycle of demand, cost, shaping
/// radii, evaluation engine and seed.
struct Scenario {
  std::string name;
  ItemCatalog catalog;
  DemandProfile profile;
  CostModel cost;
  std::vector<double> alpha{kDefaultShapeAlpha};
  EvalConfig eval;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> ratings;  ///< per user; may be empty
  std::vector<std::string> warnings;
  std::string hash;  ///< FNV-1a 64 of the canonical JSON, hex
};

/// Parses the JSON scenario format documented in the README. Unknown keys,
/// wrong types and cross-field inconsistencies throw ScenarioError.
[[nodiscard]] Scenario parse_scenario(std::string_view text);
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a(std::string_view bytes) noexcept;
[[nodiscard]] std::string hex64(std::uint64_t value);

}  // namespace proshape
