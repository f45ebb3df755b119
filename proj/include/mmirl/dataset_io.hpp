#ifndef MMIRL_DATASET_IO_HPP_
#define MMIRL_DATASET_IO_HPP_

#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmirl/trajectory.hpp"

namespace mmirl {

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kDatasetSchemaVersion = 1;

namespace detail {

// 17 significant digits round-trip any finite double exactly. Values that
// format as bare integers get a ".0" suffix so JSON parsers read them back
// as doubles (keeping, e.g., the sign of -0.0).
inline void append_real(std::string& out, double v) {
  char buf[44];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  out += s;
}

inline void append_matrix(std::string& out, const std::vector<std::vector<double>>& m) {
  out += '[';
  for (std::size_t r = 0; r < m.size(); ++r) {
    if (r) out += ',';
    out += '[';
    for (std::size_t c = 0; c < m[r].size(); ++c) {
      if (c) out += ',';
      append_real(out, m[r][c]);
    }
    out += ']';
  }
  out += ']';
}

inline std::vector<std::vector<double>> matrix_from_json(const nlohmann::json& j) {
  std::vector<std::vector<double>> m;
  m.reserve(j.size());
  for (const auto& row : j) m.push_back(row.get<std::vector<double>>());
  return m;
}

}  // namespace detail

/// One self-delimiting JSON record per line, UTF-8.
inline std::string serialize_record(const TrajectoryRecord& rec) {
  std::string out = "{\"schema_version\":";
  out += std::to_string(rec.schema_version);
  out += ",\"env_id\":\"" + rec.env_id + "\"";
  out += ",\"length\":" + std::to_string(rec.traj.length());
  out += ",\"states\":";
  detail::append_matrix(out, rec.traj.states);
  out += ",\"actions\":";
  detail::append_matrix(out, rec.traj.actions);
  if (rec.sidecar) {
    out += ",\"sidecar\":{\"mode_label\":" + std::to_string(rec.sidecar->mode_label);
    out += ",\"expert_kind\":\"" + rec.sidecar->expert_kind + "\"";
    out += ",\"rewards\":[";
    for (std::size_t i = 0; i < rec.sidecar->rewards.size(); ++i) {
      if (i) out += ',';
      detail::append_real(out, rec.sidecar->rewards[i]);
    }
    out += "]}";
  }
  out += "}";
  return out;
}

inline void write_dataset(const std::string& path, std::span<const TrajectoryRecord> records) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DatasetError("dataset: cannot open '" + path + "' for writing");
  for (const auto& rec : records) {
    f << serialize_record(rec) << "\n";
  }
  if (!f) throw DatasetError("dataset: write failure on '" + path + "'");
}

inline TrajectoryRecord parse_record(const std::string& line, const std::string& where) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded()) throw DatasetError(where + ": truncated or malformed record");
  TrajectoryRecord rec;
  try {
    rec.schema_version = j.at("schema_version").get<int>();
    if (rec.schema_version != kDatasetSchemaVersion)
      throw DatasetError(where + ": schema version " + std::to_string(rec.schema_version) +
                         " not supported (expected " + std::to_string(kDatasetSchemaVersion) + ")");
    rec.env_id = j.at("env_id").get<std::string>();
    const std::size_t length = j.at("length").get<std::size_t>();
    rec.traj.states = detail::matrix_from_json(j.at("states"));
    rec.traj.actions = detail::matrix_from_json(j.at("actions"));
    if (rec.traj.states.size() != length || rec.traj.actions.size() != length)
      throw DatasetError(where + ": row counts (" + std::to_string(rec.traj.states.size()) + " states, " +
                         std::to_string(rec.traj.actions.size()) + " actions) do not match length " +
                         std::to_string(length));
    if (j.contains("sidecar")) {
      Sidecar sc;
      const auto& js = j.at("sidecar");
      sc.mode_label = js.at("mode_label").get<int>();
      sc.expert_kind = js.value("expert_kind", std::string{});
      if (js.contains("rewards")) sc.rewards = js.at("rewards").get<std::vector<double>>();
      rec.sidecar = std::move(sc);
    }
  } catch (const DatasetError&) {
    throw;
  } catch (const std::exception& e) {
    throw DatasetError(where + ": " + e.what());
  }
  return rec;
}

/// Full records, sidecar included — the evaluation load path.
inline DemoDataset read_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DatasetError("dataset: cannot open '" + path + "'");
  DemoDataset out;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    out.push_back(parse_record(line, path + ":" + std::to_string(line_no)));
  }
  return out;
}

/// Training load path: yields the stripped Trajectory type, which cannot
/// carry mode labels or rewards.
inline std::vector<Trajectory> read_training_set(const std::string& path) {
  DemoDataset full = read_dataset(path);
  std::vector<Trajectory> out;
  out.reserve(full.size());
  for (auto& rec : full) out.push_back(std::move(rec.traj));
  return out;
}

}  // namespace mmirl

#endif  // MMIRL_DATASET_IO_HPP_
