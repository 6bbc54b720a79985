#pragma once

// Matrix-vector inversion datapaths: pseudo-inverse (A^+ y) and the
// three-product SVD scheme x = (V Z)(U^T y) used by TSVD and Tikhonov.
//
// Fixed-point runs quantize every operand at entry, accumulate dot products
// exactly and round once per output. Row partitioning over K memories only
// changes the schedule, so results are bit-identical for every K.

#include "ftsinv/error.hpp"
#include "ftsinv/fxp.hpp"
#include "ftsinv/hwmodel.hpp"
#include "ftsinv/optics.hpp"
#include "ftsinv/svd.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fts::inv {

/// Word width of the datapath. bits == 0 selects double precision. Without
/// frac_bits each operand is block scaled: W-bit words sharing the
/// power-of-two scale that fits its largest element, which may exceed the
/// word (a negative fraction count).
struct DatapathFormat {
  int bits = 0;
  std::optional<int> frac_bits;
  /// When false only the interferogram is quantized; coefficients and
  /// arithmetic stay in double precision.
  bool quantize_coefficients = true;

  static DatapathFormat double_precision() { return {}; }
  static DatapathFormat fixed(int bits, std::optional<int> frac_bits = std::nullopt) {
    return {bits, frac_bits, true};
  }
  bool is_double() const { return bits == 0; }
  void validate() const;
  /// Fraction bits for an operand whose largest magnitude is max_abs.
  int frac_for(double max_abs) const;
  std::string describe() const;
};

/// Rows of a source matrix split over K independent memories; the first
/// rows % K partitions hold one extra row.
template <class Matrix>
struct BankedOperand {
  std::vector<Matrix> partitions;
  std::vector<Eigen::Index> first_row;

  int k() const { return static_cast<int>(partitions.size()); }
  Eigen::Index rows() const {
    Eigen::Index r = 0;
    for (const auto& p : partitions) r += p.rows();
    return r;
  }
};

/// Throws DomainError when k < 1 or k > rows.
template <class Matrix>
BankedOperand<Matrix> bank_rows(const Matrix& source, int k);

template <class Matrix>
Matrix concatenate(const BankedOperand<Matrix>& banked);

struct InversionTelemetry {
  std::uint64_t multiplies = 0;
  std::uint64_t overflows = 0;
  std::uint64_t latency_cycles = 0;
  double time_us = 0;
  int k = 1;
  int effective_rank = 0;
  std::string scheme;
  double lambda = 0;
  std::string format;
  fxp::RoundingPolicy entry_policy = fxp::RoundingPolicy::entry();
  fxp::RoundingPolicy datapath_policy = fxp::RoundingPolicy::datapath();
};

struct InversionResult {
  optics::Spectrum estimate;
  InversionTelemetry telemetry;
};

struct DatapathOptions {
  DatapathFormat format;
  int k = 1;
  hw::CalibrationTable calibration = hw::CalibrationTable::builtin();
};

/// x = A^+ y over K banked dot-product streams; N * M multiplies.
/// Throws DimensionError on shape mismatch and DomainError when K > N.
InversionResult reconstruct_pinv(const Eigen::MatrixXd& pinv, const optics::Interferogram& y,
                                 const optics::SpectralGrid& grid, const DatapathOptions& options);

/// x = (V_R' Z)(U_R'^T y) over the R' nonzero coefficients; R'(2N + M)
/// multiplies. Z is quantized to the datapath format before use.
InversionResult reconstruct_svd(const svd::SvdFactors& factors, const svd::PenalizedDiagonal& zeta,
                                const optics::Interferogram& y, const optics::SpectralGrid& grid,
                                const DatapathOptions& options);

// ---------------------------------------------------------------------------

template <class Matrix>
BankedOperand<Matrix> bank_rows(const Matrix& source, int k) {
  if (k < 1) throw DomainError("bank_rows: K must be >= 1");
  if (k > source.rows()) throw DomainError("bank_rows: K exceeds the row count");
  BankedOperand<Matrix> out;
  const Eigen::Index base = source.rows() / k;
  const Eigen::Index extra = source.rows() % k;
  Eigen::Index row = 0;
  for (int p = 0; p < k; ++p) {
    const Eigen::Index count = base + (p < extra ? 1 : 0);
    out.first_row.push_back(row);
    out.partitions.push_back(source.middleRows(row, count));
    row += count;
  }
  return out;
}

template <class Matrix>
Matrix concatenate(const BankedOperand<Matrix>& banked) {
  if (banked.partitions.empty()) return Matrix();
  Matrix out(banked.rows(), banked.partitions.front().cols());
  for (int p = 0; p < banked.k(); ++p)
    out.middleRows(banked.first_row[p], banked.partitions[p].rows()) = banked.partitions[p];
  return out;
}

}  // namespace fts::inv
