#include "ftsinv/io.hpp"

#include "ftsinv/config.hpp"
#include "ftsinv/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace fts::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary container assumes a little-endian host");

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.write(b, 8);
}

std::uint64_t get_u64(std::istream& in) {
  char b[8];
  if (!in.read(b, 8)) throw ConfigError("matrix container: truncated header");
  std::uint64_t v;
  std::memcpy(&v, b, 8);
  return v;
}

std::vector<std::vector<double>> read_csv_rows(std::istream& in, bool skip_header, std::string* header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (first && skip_header) {
      first = false;
      if (header) *header = line;
      continue;
    }
    first = false;
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');)
      row.push_back(config::parse_double(cell, "csv line " + std::to_string(lineno)));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> read_two_columns(std::istream& in, const std::string& expected) {
  std::string header;
  const auto rows = read_csv_rows(in, true, &header);
  if (header != expected) throw ConfigError("csv: expected header '" + expected + "', got '" + header + "'");
  Eigen::VectorXd coord(rows.size()), value(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 2) throw ConfigError("csv: expected two columns");
    coord(i) = rows[i][0];
    value(i) = rows[i][1];
  }
  return {coord, value};
}

template <class F>
void with_output(const std::filesystem::path& path, std::ios::openmode mode, F&& f) {
  std::ofstream out(path, mode);
  if (!out) throw ConfigError("cannot write " + path.string());
  f(out);
  if (!out) throw ConfigError("write failed: " + path.string());
}

template <class F>
auto with_input(const std::filesystem::path& path, std::ios::openmode mode, F&& f) {
  std::ifstream in(path, mode);
  if (!in) throw ConfigError("cannot open " + path.string());
  return f(in);
}

bool is_csv(const std::filesystem::path& p) { return p.extension() == ".csv"; }

}  // namespace

void write_matrix_binary(std::ostream& out, const Eigen::MatrixXd& m) {
  out.write(kMatrixMagic.data(), static_cast<std::streamsize>(kMatrixMagic.size()));
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

Eigen::MatrixXd read_matrix_binary(std::istream& in) {
  char magic[16];
  if (!in.read(magic, 16) || std::string_view(magic, 16) != kMatrixMagic)
    throw ConfigError("matrix container: bad magic");
  const auto rows = get_u64(in);
  const auto cols = get_u64(in);
  if (rows > (1u << 24) || cols > (1u << 24) || rows * cols > (1ull << 28))
    throw ConfigError("matrix container: implausible dimensions");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  if (!in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double))))
    throw ConfigError("matrix container: truncated payload");
  return rm;
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
  const auto rows = read_csv_rows(in, false, nullptr);
  if (rows.empty()) throw ConfigError("csv matrix: no rows");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw ConfigError("csv matrix: ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void write_spectrum_csv(std::ostream& out, const optics::Spectrum& s) {
  out << "wavenumber,value\n" << std::setprecision(17);
  for (int i = 0; i < s.grid.n; ++i) out << s.grid.midpoint(i) << ',' << s.values(i) << '\n';
}

optics::Spectrum read_spectrum_csv(std::istream& in) {
  auto [coord, value] = read_two_columns(in, "wavenumber,value");
  const auto n = static_cast<int>(coord.size());
  if (n < 2) throw ConfigError("spectrum csv: need at least 2 bins");
  // Midpoints (2i+1) B / 2N: first midpoint is half a bin.
  const double bandwidth = 2.0 * n * coord(0);
  auto grid = optics::SpectralGrid::make(n, bandwidth);
  for (int i = 0; i < n; ++i)
    if (std::abs(coord(i) - grid.midpoint(i)) > 1e-9 * bandwidth)
      throw ConfigError("spectrum csv: wavenumbers are not evenly spaced bin midpoints");
  return {value, grid};
}

void write_interferogram_csv(std::ostream& out, const optics::Interferogram& y) {
  out << "opd,value\n" << std::setprecision(17);
  for (Eigen::Index k = 0; k < y.values.size(); ++k) out << y.grid.delta(k) << ',' << y.values(k) << '\n';
}

optics::Interferogram read_interferogram_csv(std::istream& in) {
  auto [coord, value] = read_two_columns(in, "opd,value");
  if (coord.size() < 2) throw ConfigError("interferogram csv: need at least 2 samples");
  const double step = coord(1) - coord(0);
  bool regular = coord(0) == 0.0 && step > 0;
  for (Eigen::Index k = 0; regular && k < coord.size(); ++k)
    regular = std::abs(coord(k) - k * step) <= 1e-12 * std::max(1.0, coord(k));
  auto grid = regular ? optics::OpdGrid::regular(static_cast<int>(coord.size()), step)
                      : optics::OpdGrid::irregular(coord);
  return {value, std::move(grid), std::nullopt};
}

void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  if (is_csv(path)) with_output(path, std::ios::out, [&](std::ostream& o) { write_matrix_csv(o, m); });
  else with_output(path, std::ios::out | std::ios::binary, [&](std::ostream& o) { write_matrix_binary(o, m); });
}

Eigen::MatrixXd load_matrix(const std::filesystem::path& path) {
  if (is_csv(path)) return with_input(path, std::ios::in, [](std::istream& i) { return read_matrix_csv(i); });
  return with_input(path, std::ios::in | std::ios::binary, [](std::istream& i) { return read_matrix_binary(i); });
}

void save_spectrum(const std::filesystem::path& path, const optics::Spectrum& s) {
  with_output(path, std::ios::out, [&](std::ostream& o) { write_spectrum_csv(o, s); });
}

optics::Spectrum load_spectrum(const std::filesystem::path& path) {
  return with_input(path, std::ios::in, [](std::istream& i) { return read_spectrum_csv(i); });
}

void save_interferogram(const std::filesystem::path& path, const optics::Interferogram& y) {
  with_output(path, std::ios::out, [&](std::ostream& o) { write_interferogram_csv(o, y); });
}

optics::Interferogram load_interferogram(const std::filesystem::path& path) {
  return with_input(path, std::ios::in, [](std::istream& i) { return read_interferogram_csv(i); });
}

}  // namespace fts::io
