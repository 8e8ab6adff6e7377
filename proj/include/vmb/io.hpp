#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vmb/fields.hpp"

namespace vmb {

// RFC-4180 writer: CRLF line ends, quoted fields when needed, doubles at 17 significant digits.
class CsvWriter {
 public:
  CsvWriter() = default;
  CsvWriter(const std::string& path, const std::vector<std::string>& header, bool append = false);
  void row(const std::vector<double>& values);
  bool is_open() const { return out_.is_open(); }

  static std::string format(double v);
  static std::string escape(const std::string& field);

 private:
  std::ofstream out_;
  std::size_t width_ = 0;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path);

// <base>.json header plus <base>.bin raw little-endian float64, index order
// species, x, v1, v2, v3 (slowest to fastest)
struct Snapshot {
  KineticState state;
  int step = 0;
  int nv = 0;
  nlohmann::json header;  // full header, including the run config under "config"
};

void write_snapshot(const std::string& base, const KineticState& s, int step, int nv,
                    const nlohmann::json& extra);
Snapshot read_snapshot(const std::string& base);

}  // namespace vmb
