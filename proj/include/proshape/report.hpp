#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "proshape/experiments.hpp"
#include "proshape/load_eval.hpp"

namespace proshape {

[[nodiscard]] std::string tool_version();

/// Fixed-precision, locale-free number text used in every output file.
[[nodiscard]] std::string format_number(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::string str() const;
};

struct FileRecord {
  std::string path;
  std::string checksum;  ///< FNV-1a 64, hex
};

/// Writes `content` to `path` (creating parent directories) and returns the
/// checksum of what was written.
FileRecord write_output(const std::filesystem::path& path,
                        const std::string& content);

struct RunReport {
  std::string command;
  std::string scenario_hash;
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
  std::vector<FileRecord> files;

  [[nodiscard]] nlohmann::ordered_json to_json() const;
};

/// Columns: slot, engine, value, stderr.
[[nodiscard]] CsvTable slot_cost_table(const std::vector<Estimate>& slots,
                                       Engine engine);
/// Columns: user, slot, item, x.
[[nodiscard]] CsvTable allocation_table(const ProactiveAllocation& x);
/// Columns: N, c_nonproactive, c_proactive, delta_c, ratio, stderr.
[[nodiscard]] CsvTable scaling_table(const ScalingCurve& curve);
/// Columns: iter, f0, residual.
[[nodiscard]] CsvTable trace_table(const ShapingTrace& trace);
/// Columns: user, slot, item, p_original, p_shaped.
[[nodiscard]] CsvTable profile_table(const DemandProfile& original,
                                     const DemandProfile& shaped);
/// Columns: p_peak, feasible, c_nonproactive, c_proactive.
[[nodiscard]] CsvTable sweep_table(const std::vector<SweepPoint>& sweep);
/// Columns: user, item, pi_original, pi_shaped, rating.
[[nodiscard]] CsvTable shaped_users_table(const std::vector<ShapedUser>& users);

}  // namespace proshape
