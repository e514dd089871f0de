#pragma once

// Dataset CSV:
//   # entwit-dataset v1, n_qubits=<N>, kind=<K>, seed=<S>[, config=<hash>]
//   label,family,split,f1,...,fd
// Optional sidecar: one row-major dim x dim complex matrix per row,
// little-endian float64 interleaved re/im.

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "entwit/datagen.hpp"
#include "entwit/hash.hpp"

namespace entwit::datagen {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

class DatasetFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

inline std::string dataset_header(const LabeledDataset& ds) {
  return "# entwit-dataset v1, n_qubits=" + std::to_string(ds.n_qubits) + ", kind=" + std::string(to_string(ds.kind)) +
         ", seed=" + std::to_string(ds.seed) + (ds.config_hash.empty() ? "" : ", config=" + ds.config_hash);
}

inline void write_dataset_csv(const LabeledDataset& ds, std::ostream& out) {
  out << dataset_header(ds) << '\n';
  const int d = feature_dimension(ds.n_qubits);
  out << "label,family,split";
  for (int k = 1; k <= d; ++k) out << ",f" << k;
  out << '\n';
  std::string line;
  for (const auto& r : ds.rows) {
    line.clear();
    line += (r.label > 0 ? "1" : "-1");
    line += ',';
    line += r.family;
    line += ',';
    line += to_string(r.split);
    for (Eigen::Index k = 0; k < r.x.size(); ++k) {
      line += ',';
      line += format_double(r.x(k));
    }
    line += '\n';
    out << line;
  }
}

inline std::string to_csv(const LabeledDataset& ds) {
  std::ostringstream s;
  write_dataset_csv(ds, s);
  return s.str();
}

/// Content hash of the CSV serialization.
inline std::uint64_t dataset_hash(const LabeledDataset& ds) { return fnv1a(to_csv(ds)); }

inline void write_state_sidecar(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  const int dim = qstate::dim_of(ds.n_qubits);
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    const auto& s = ds.rows[i].state;
    if (!s || s->rows() != dim || s->cols() != dim)
      throw std::runtime_error("write_state_sidecar: row " + std::to_string(i) + " has no stored state");
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        const double re = (*s)(a, b).real();
        const double im = (*s)(a, b).imag();
        out.write(reinterpret_cast<const char*>(&re), sizeof re);
        out.write(reinterpret_cast<const char*>(&im), sizeof im);
      }
    }
  }
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline void save_dataset(const LabeledDataset& ds, const std::string& csv_path, const std::string& sidecar_path = {}) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + csv_path + "' for writing");
  write_dataset_csv(ds, out);
  if (!out) throw std::runtime_error("write failed for '" + csv_path + "'");
  if (!sidecar_path.empty()) write_state_sidecar(ds, sidecar_path);
}

namespace io_detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string_view header_field(std::string_view header, std::string_view key) {
  const std::string pattern = std::string(key) + "=";
  const auto pos = header.find(pattern);
  if (pos == std::string_view::npos) throw DatasetFormatError("dataset header lacks '" + std::string(key) + "'");
  auto rest = header.substr(pos + pattern.size());
  return rest.substr(0, rest.find(','));
}

template <class T>
T parse_number(std::string_view s, const std::string& context) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw DatasetFormatError(context + ": cannot parse '" + std::string(s) + "'");
  return v;
}

}  // namespace io_detail

inline LabeledDataset read_dataset_csv(std::istream& in, const std::string& name = "<stream>") {
  using namespace io_detail;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# entwit-dataset v1", 0) != 0)
    throw DatasetFormatError(name + ": missing '# entwit-dataset v1' header");
  LabeledDataset ds;
  ds.n_qubits = parse_number<int>(header_field(line, "n_qubits"), name);
  ds.kind = parse_kind(header_field(line, "kind"));
  ds.seed = parse_number<std::uint64_t>(header_field(line, "seed"), name);
  if (line.find("config=") != std::string::npos) ds.config_hash = std::string(header_field(line, "config"));
  if (ds.n_qubits < 1 || ds.n_qubits > 3) throw DatasetFormatError(name + ": unsupported n_qubits");
  const int d = feature_dimension(ds.n_qubits);

  if (!std::getline(in, line) || line.rfind("label,family,split", 0) != 0)
    throw DatasetFormatError(name + ": missing column header");
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto ctx = name + ":" + std::to_string(lineno);
    const auto cells = split_commas(line);
    if (static_cast<int>(cells.size()) != d + 3)
      throw DatasetFormatError(ctx + ": expected " + std::to_string(d + 3) + " columns");
    DatasetRow row;
    row.label = parse_number<int>(cells[0], ctx);
    if (row.label != 1 && row.label != -1) throw DatasetFormatError(ctx + ": label must be +1 or -1");
    row.family = std::string(cells[1]);
    row.split = parse_split(cells[2]);
    row.x.resize(d);
    for (int k = 0; k < d; ++k) row.x(k) = parse_number<double>(cells[3 + k], ctx);
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

inline void read_state_sidecar(LabeledDataset& ds, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  const int dim = qstate::dim_of(ds.n_qubits);
  std::vector<double> buf(2 * static_cast<std::size_t>(dim) * dim);
  for (auto& row : ds.rows) {
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!in) throw DatasetFormatError(path + ": truncated state sidecar");
    CMatrix m(dim, dim);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) m(a, b) = cplx(buf[2 * (a * dim + b)], buf[2 * (a * dim + b) + 1]);
    row.state = std::move(m);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DatasetFormatError(path + ": sidecar has extra records");
}

inline LabeledDataset load_dataset(const std::string& csv_path, const std::string& sidecar_path = {}) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + csv_path + "'");
  auto ds = read_dataset_csv(in, csv_path);
  if (!sidecar_path.empty()) read_state_sidecar(ds, sidecar_path);
  return ds;
}

}  // namespace entwit::datagen
