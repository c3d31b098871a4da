#include "proshape/report.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "proshape/scenario.hpp"

namespace proshape {

std::string tool_version() { return PROSHAPE_VERSION; }

std::string format_number(double value) { return fmt::format("{:.12g}", value); }

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
  return out;
}

FileRecord write_output(const std::filesystem::path& path,
                        const std::string& content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  }
  out << content;
  if (!out) {
    throw std::runtime_error(fmt::format("write failed for '{}'", path.string()));
  }
  return {path.string(), hex64(fnv1a(content))};
}

nlohmann::ordered_json RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "proshape";
  j["version"] = tool_version();
  j["command"] = command;
  j["scenario_hash"] = scenario_hash;
  j["metrics"] = metrics;
  auto files_json = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    files_json.push_back({{"path", f.path}, {"checksum", f.checksum}});
  }
  j["files"] = files_json;
  return j;
}

CsvTable slot_cost_table(const std::vector<Estimate>& slots, Engine engine) {
  CsvTable table{{"slot", "engine", "value", "stderr"}, {}};
  for (std::size_t t = 0; t < slots.size(); ++t) {
    table.rows.push_back({std::to_string(t), to_string(engine),
                          format_number(slots[t].value),
                          format_number(slots[t].std_error)});
  }
  return table;
}

CsvTable allocation_table(const ProactiveAllocation& x) {
  CsvTable table{{"user", "slot", "item", "x"}, {}};
  for (std::size_t n = 0; n < x.users(); ++n) {
    for (std::size_t t = 0; t < x.slots(); ++t) {
      for (std::size_t m = 0; m < x.items(); ++m) {
        table.rows.push_back(
            {std::to_string(n), std::to_string(t), std::to_string(m + 1),
             format_number(x(n, static_cast<std::ptrdiff_t>(t), m))});
      }
    }
  }
  return table;
}

CsvTable scaling_table(const ScalingCurve& curve) {
  CsvTable table{
      {"N", "c_nonproactive", "c_proactive", "delta_c", "ratio", "stderr"}, {}};
  for (const auto& p : curve.points) {
    table.rows.push_back({std::to_string(p.users),
                          format_number(p.c_nonproactive),
                          format_number(p.c_proactive),
                          format_number(p.delta_c), format_number(p.ratio),
                          format_number(p.std_error)});
  }
  return table;
}

CsvTable trace_table(const ShapingTrace& trace) {
  CsvTable table{{"iter", "f0", "residual"}, {}};
  for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
    table.rows.push_back({std::to_string(k),
                          format_number(trace.iterates[k].f0),
                          format_number(trace.iterates[k].max_boundary_residual)});
  }
  return table;
}

CsvTable profile_table(const DemandProfile& original,
                       const DemandProfile& shaped) {
  CsvTable table{{"user", "slot", "item", "p_original", "p_shaped"}, {}};
  for (std::size_t n = 0; n < original.users(); ++n) {
    for (std::size_t t = 0; t < original.slots(); ++t) {
      const auto ts = static_cast<std::ptrdiff_t>(t);
      for (std::size_t m = 0; m < original.items(); ++m) {
        table.rows.push_back({std::to_string(n), std::to_string(t),
                              std::to_string(m + 1),
                              format_number(original.prob(n, ts, m)),
                              format_number(shaped.prob(n, ts, m))});
      }
    }
  }
  return table;
}

CsvTable sweep_table(const std::vector<SweepPoint>& sweep) {
  CsvTable table{{"p_peak", "feasible", "c_nonproactive", "c_proactive"}, {}};
  for (const auto& p : sweep) {
    table.rows.push_back({format_number(p.p_peak), p.feasible ? "1" : "0",
                          format_number(p.c_nonproactive),
                          format_number(p.c_proactive)});
  }
  return table;
}

CsvTable shaped_users_table(const std::vector<ShapedUser>& users) {
  CsvTable table{{"user", "item", "pi_original", "pi_shaped", "rating"}, {}};
  for (const auto& u : users) {
    for (std::size_t m = 0; m < u.original.size(); ++m) {
      table.rows.push_back({std::to_string(u.user), std::to_string(m + 1),
                            format_number(u.original[m]),
                            format_number(u.shaped[m]),
                            format_number(u.rating.v[m])});
    }
  }
  return table;
}

}  // namespace proshape
