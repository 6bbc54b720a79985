#pragma once

// File formats: a binary matrix container, CSV matrices, and two-column
// spectrum / interferogram CSV files.
//
// Binary container layout: 16-byte magic "FTSINVMATRIX0001", rows and cols as
// unsigned 64-bit little-endian, then rows * cols little-endian IEEE-754
// doubles in row-major order.

#include "ftsinv/optics.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <string_view>

namespace fts::io {

inline constexpr std::string_view kMatrixMagic = "FTSINVMATRIX0001";

void write_matrix_binary(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_binary(std::istream& in);

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(std::istream& in);

/// Header "wavenumber,value"; one row per bin midpoint.
void write_spectrum_csv(std::ostream& out, const optics::Spectrum& s);
/// Rebuilds the grid from evenly spaced bin midpoints.
optics::Spectrum read_spectrum_csv(std::istream& in);

/// Header "opd,value".
void write_interferogram_csv(std::ostream& out, const optics::Interferogram& y);
/// Grids that start at zero with a constant step are recovered as regular.
optics::Interferogram read_interferogram_csv(std::istream& in);

// Path wrappers; the matrix format is chosen by extension (.csv or binary).
void save_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix(const std::filesystem::path& path);
void save_spectrum(const std::filesystem::path& path, const optics::Spectrum& s);
optics::Spectrum load_spectrum(const std::filesystem::path& path);
void save_interferogram(const std::filesystem::path& path, const optics::Interferogram& y);
optics::Interferogram load_interferogram(const std::filesystem::path& path);

}  // namespace fts::io
