#include "vmb/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <sstream>

namespace vmb {

static_assert(std::endian::native == std::endian::little, "snapshot format assumes a little-endian host");

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header, bool append)
    : width_(header.size()) {
  const bool fresh = !append || !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  out_.open(path, append ? std::ios::app | std::ios::binary : std::ios::trunc | std::ios::binary);
  if (!out_) throw std::runtime_error("cannot open CSV file " + path);
  if (fresh) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << escape(header[i]);
    out_ << "\r\n";
  }
}

std::string CsvWriter::format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvWriter::escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) throw std::invalid_argument("CSV row width does not match header");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format(values[i]);
  out_ << "\r\n";
  out_.flush();
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open CSV file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string s = ss.str();
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < s.size() && s[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < s.size() && s[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
    } else {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

nlohmann::json field_json(const Field3& F) {
  nlohmann::json a = nlohmann::json::array();
  for (Index j = 0; j < F.rows(); ++j) a.push_back({F(j, 0), F(j, 1), F(j, 2)});
  return a;
}

Field3 field_from_json(const nlohmann::json& a, Index nx) {
  if (!a.is_array() || Index(a.size()) != nx) throw std::runtime_error("snapshot: field array has wrong size");
  Field3 F(nx, 3);
  for (Index j = 0; j < nx; ++j)
    for (int i = 0; i < 3; ++i) F(j, i) = a[j][i].get<double>();
  return F;
}

}  // namespace

void write_snapshot(const std::string& base, const KineticState& s, int step, int nv,
                    const nlohmann::json& extra) {
  const Index n2 = s.f.rows(), nx = s.f.cols(), n = n2 / 2;
  nlohmann::json h = extra;
  h["format"] = "vmb-snapshot-1";
  h["dtype"] = "float64";
  h["byte_order"] = "little";
  h["index_order"] = {"species", "x", "v1", "v2", "v3"};
  h["shape"] = {2, nx, nv, nv, nv};
  h["species"] = {"+", "-"};
  h["data_file"] = std::filesystem::path(base + ".bin").filename().string();
  h["t"] = s.t;
  h["step"] = step;
  h["E"] = field_json(s.em.E);
  h["B"] = field_json(s.em.B);

  std::vector<double> buf;
  buf.reserve(std::size_t(n2 * nx));
  for (int sp = 0; sp < 2; ++sp)
    for (Index j = 0; j < nx; ++j)
      for (Index i = 0; i < n; ++i) buf.push_back(s.f(sp * n + i, j));
  std::ofstream bin(base + ".bin", std::ios::binary | std::ios::trunc);
  if (!bin) throw std::runtime_error("cannot write snapshot " + base + ".bin");
  bin.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size() * sizeof(double)));
  std::ofstream js(base + ".json", std::ios::trunc);
  if (!js) throw std::runtime_error("cannot write snapshot " + base + ".json");
  js << h.dump(2) << "\n";
}

Snapshot read_snapshot(const std::string& base_or_json) {
  std::string base = base_or_json;
  if (base.size() > 5 && base.substr(base.size() - 5) == ".json") base.resize(base.size() - 5);
  std::ifstream js(base + ".json");
  if (!js) throw std::runtime_error("cannot read snapshot header " + base + ".json");
  Snapshot snap;
  snap.header = nlohmann::json::parse(js);
  const auto& h = snap.header;
  if (h.value("format", "") != "vmb-snapshot-1") throw std::runtime_error("snapshot: unknown format");
  const auto shape = h.at("shape").get<std::vector<Index>>();
  if (shape.size() != 5 || shape[0] != 2 || shape[2] != shape[3] || shape[3] != shape[4])
    throw std::runtime_error("snapshot: bad shape");
  const Index nx = shape[1], nv = shape[2], n = nv * nv * nv;
  snap.nv = int(nv);
  snap.step = h.at("step").get<int>();
  snap.state.t = h.at("t").get<double>();
  snap.state.em.E = field_from_json(h.at("E"), nx);
  snap.state.em.B = field_from_json(h.at("B"), nx);

  auto dir = std::filesystem::path(base).parent_path();
  std::ifstream bin(dir / h.value("data_file", std::filesystem::path(base + ".bin").filename().string()),
                    std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read snapshot data for " + base);
  std::vector<double> buf(std::size_t(2 * nx * n));
  bin.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size() * sizeof(double)));
  if (bin.gcount() != std::streamsize(buf.size() * sizeof(double)))
    throw std::runtime_error("snapshot: data file is truncated");
  snap.state.f.resize(2 * n, nx);
  std::size_t k = 0;
  for (int sp = 0; sp < 2; ++sp)
    for (Index j = 0; j < nx; ++j)
      for (Index i = 0; i < n; ++i) snap.state.f(sp * n + i, j) = buf[k++];
  return snap;
}

}  // namespace vmb
