#ifndef MMIRL_METRICS_HPP_
#define MMIRL_METRICS_HPP_

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace mmirl {

using MetricValue = std::variant<long long, double, std::string>;
using MetricRecord = std::vector<std::pair<std::string, MetricValue>>;

/// Line-delimited metrics log: one JSON object per record, fields in the
/// order they were added. Reals carry 17 significant digits.
class MetricsWriter {
 public:
  MetricsWriter() = default;
  explicit MetricsWriter(const std::string& path) : f_(path, std::ios::app) {
    if (!f_) throw std::runtime_error("metrics: cannot open '" + path + "'");
  }

  void append(const MetricRecord& rec) {
    if (!f_.is_open()) return;
    f_ << format(rec) << "\n";
    f_.flush();
  }

  static std::string format(const MetricRecord& rec) {
    std::string out = "{";
    bool first = true;
    for (const auto& [key, value] : rec) {
      if (!first) out += ",";
      first = false;
      out += "\"" + key + "\":";
      if (std::holds_alternative<long long>(value)) {
        out += std::to_string(std::get<long long>(value));
      } else if (std::holds_alternative<double>(value)) {
        const double v = std::get<double>(value);
        if (!std::isfinite(v)) {
          out += "null";  // JSON has no non-finite literals
        } else {
          char buf[40];
          std::snprintf(buf, sizeof(buf), "%.17g", v);
          out += buf;
        }
      } else {
        out += "\"" + std::get<std::string>(value) + "\"";
      }
    }
    return out + "}";
  }

 private:
  std::ofstream f_;
};

/// Parses a metrics file back into JSON objects (tests, eval tooling).
inline std::vector<nlohmann::json> read_metrics(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("metrics: cannot open '" + path + "'");
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    out.push_back(nlohmann::json::parse(line));
  }
  return out;
}

}  // namespace mmirl

#endif  // MMIRL_METRICS_HPP_
