#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hapsris/config.hpp"
#include "hapsris/experiments.hpp"

namespace hapsris {

inline constexpr const char* kToolVersion = "0.1.0";

/// Reproduction record for a CLI invocation. The timestamp is kept out of the
/// report body so repeated runs produce identical report files.
struct RunManifest {
  NetworkConfig config;
  std::string command;
  std::string tool_version = kToolVersion;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> objectives;
  std::optional<std::string> axis;
  std::vector<double> axis_values;
  std::vector<std::string> outputs;
  std::string timestamp;
};

inline nlohmann::ordered_json manifest_json(const RunManifest& m, bool with_timestamp) {
  nlohmann::ordered_json j;
  j["tool_version"] = m.tool_version;
  j["command"] = m.command;
  j["config"] = to_json(m.config);
  j["config_hash"] = config_hash(m.config);
  j["bs_power_interpretation"] = to_string(m.config.bs_power_mode);
  j["seeds"] = m.seeds;
  j["objectives"] = m.objectives;
  if (m.axis) {
    j["axis"] = *m.axis;
    j["axis_values"] = m.axis_values;
  }
  j["outputs"] = m.outputs;
  if (with_timestamp) j["timestamp"] = m.timestamp;
  return j;
}

inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "seed",          "axis_value",    "objective",      "k1_count",      "k2_count",
      "coverage_pct",  "served_pct",    "sum_rate_bps",   "mean_rate_bps", "worst_rate_bps",
      "total_n_units", "total_p_watts", "solver_status",  "solver_iters"};
  return cols;
}

inline std::string fmt_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

/// One row per (record, objective), columns per csv_columns().
inline std::string to_csv(const Report& rep) {
  std::ostringstream os;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const auto& r : rep.records) {
    for (const auto& o : r.results) {
      os << r.seed << "," << (r.axis_value ? fmt_sci(*r.axis_value) : std::string{}) << "," << to_string(o.objective)
         << "," << r.k1_count << "," << r.k2_count << "," << fmt_sci(r.coverage_pct) << "," << fmt_sci(o.served_pct)
         << "," << fmt_sci(o.sum_rate_bps) << "," << fmt_sci(o.mean_rate_bps) << "," << fmt_sci(o.worst_rate_bps)
         << "," << fmt_sci(o.total_n_units) << "," << fmt_sci(o.total_p_watts) << "," << o.status << ","
         << o.solver_iters << "\n";
    }
  }
  return os.str();
}

inline nlohmann::ordered_json stat_json(const Stat& s) {
  return nlohmann::ordered_json{{"count", s.count}, {"mean", s.mean}, {"std", s.stddev}};
}

inline nlohmann::ordered_json to_json(const Report& rep, const RunManifest& manifest) {
  nlohmann::ordered_json j;
  j["manifest"] = manifest_json(manifest, false);
  auto& rows = j["records"];
  rows = nlohmann::ordered_json::array();
  for (const auto& r : rep.records) {
    for (const auto& o : r.results) {
      nlohmann::ordered_json row;
      row["seed"] = r.seed;
      row["axis_value"] = r.axis_value ? nlohmann::ordered_json(*r.axis_value) : nlohmann::ordered_json(nullptr);
      row["objective"] = to_string(o.objective);
      row["objective_label"] = objective_label(o.objective);
      row["config_hash"] = r.config_hash;
      row["k1_count"] = r.k1_count;
      row["k2_count"] = r.k2_count;
      row["coverage_pct"] = r.coverage_pct;
      row["served_pct"] = o.served_pct;
      row["sum_rate_bps"] = o.sum_rate_bps;
      row["mean_rate_bps"] = o.mean_rate_bps;
      row["worst_rate_bps"] = o.worst_rate_bps;
      row["total_n_units"] = o.total_n_units;
      row["total_p_watts"] = o.total_p_watts;
      row["solver_status"] = o.status;
      row["solver_iters"] = o.solver_iters;
      row["k1_mean_rate_bps"] = r.k1_mean_rate_bps;
      row["k1_worst_rate_bps"] = r.k1_worst_rate_bps;
      if (!o.message.empty()) row["message"] = o.message;
      rows.push_back(std::move(row));
    }
  }
  auto& agg = j["aggregates"];
  agg = nlohmann::ordered_json::array();
  for (const auto& a : rep.aggregates) {
    nlohmann::ordered_json row;
    row["axis_value"] = a.axis_value;
    row["objective"] = to_string(a.objective);
    row["runs"] = a.runs;
    row["solved"] = a.solved;
    row["coverage_pct"] = stat_json(a.coverage_pct);
    row["served_pct"] = stat_json(a.served_pct);
    row["sum_rate_bps"] = stat_json(a.sum_rate_bps);
    row["mean_rate_bps"] = stat_json(a.mean_rate_bps);
    row["worst_rate_bps"] = stat_json(a.worst_rate_bps);
    row["total_n_units"] = stat_json(a.total_n_units);
    row["total_p_watts"] = stat_json(a.total_p_watts);
    row["k1_mean_rate_bps"] = stat_json(a.k1_mean_rate_bps);
    row["k1_worst_rate_bps"] = stat_json(a.k1_worst_rate_bps);
    agg.push_back(std::move(row));
  }
  return j;
}

/// Writes via a sibling temp file and rename, so `path` is either the old
/// content or the complete new content.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw std::runtime_error("write failed: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace hapsris
