#ifndef MMIRL_CSV_HPP_
#define MMIRL_CSV_HPP_

#include <cstdio>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmirl {

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : f_(path, std::ios::binary), columns_(header.size()) {
    if (!f_) throw std::runtime_error("csv: cannot open '" + path + "'");
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) f_ << ",";
      f_ << header[i];
    }
    f_ << "\n";
  }

  void row(std::span<const double> values) {
    if (values.size() != columns_) throw std::invalid_argument("csv: row width mismatch");
    char buf[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) f_ << ",";
      std::snprintf(buf, sizeof(buf), "%.12g", values[i]);
      f_ << buf;
    }
    f_ << "\n";
  }

 private:
  std::ofstream f_;
  std::size_t columns_;
};

}  // namespace mmirl

#endif  // MMIRL_CSV_HPP_
