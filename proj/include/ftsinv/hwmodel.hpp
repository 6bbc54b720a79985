#pragma once

// Analytical FPGA cost model: latency, resources and wall-clock time per
// inversion method and parallelism factor K, calibrated against measured
// anchor points.
//
// Matrix methods follow cycles(K) = ceil(alpha * ops / K) + c, with ops the
// multiplier count of the method. The fit is least squares over the K sweep,
// constrained to reproduce the K = 1 anchor exactly. The FFT follows
// II * (n/2) log2(n) + 2 log2(n) + 3n + c0, c0 pinned at one anchor size.

#include "ftsinv/fft.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fts::hw {

enum class Method { Fft, Pinv, Tsvd, Tik };

const char* to_string(Method m);
/// Accepts fft, pinv, tsvd, tik. Throws ConfigError otherwise.
Method parse_method(const std::string& name);

struct HwCost {
  int dsp = 0;
  int bram = 0;
  int lut = 0;
  std::uint64_t latency_cycles = 0;
  double fmax_mhz = 0;
  double time_us = 0;  // latency_cycles / fmax_mhz
};

struct Resources {
  int dsp = 0;
  int bram = 0;
  int lut = 0;

  friend bool operator==(const Resources&, const Resources&) = default;
};

struct LatencyAnchor {
  int k = 1;
  double cycles = 0;
};

struct CalibrationTable {
  // Measured latency over the K sweep, K = 1..6.
  std::vector<LatencyAnchor> pinv_latency;
  std::vector<LatencyAnchor> svd_latency;
  // Measured fmax per K (index K-1); the last entry holds for larger K.
  std::vector<double> pinv_fmax;
  std::vector<double> svd_fmax;
  // Problem shape the matrix anchors were measured at (N = M = R).
  int reference_n = 230;
  int reference_m = 230;

  int fft_anchor_points = 512;
  double fft_anchor_cycles = 4300;
  double fft_fmax = 98;

  Resources fft_resources{5, 3, 5540};
  Resources pinv_k1{1, 27, 6390};
  Resources pinv_k6{6, 27, 6670};
  Resources svd_k1{2, 73, 7120};
  Resources svd_k6{12, 78, 8170};

  static CalibrationTable builtin();
  /// Loads the key = value calibration file; missing keys keep builtin values.
  static CalibrationTable load(const std::filesystem::path& path);
};

struct LatencyFit {
  double base_cycles = 0;   // alpha * ops at the reference shape, K = 1
  double alpha = 0;         // cycles per multiply
  long long overhead = 0;   // c
  std::vector<double> relative_residuals;  // (model - anchor) / anchor per anchor
  double max_abs_residual = 0;

  std::uint64_t cycles(double ops, int k) const;
};

LatencyFit fit_latency(const std::vector<LatencyAnchor>& anchors, double reference_ops);
LatencyFit pinv_fit(const CalibrationTable& calib);
LatencyFit svd_fit(const CalibrationTable& calib);

// Multiplier counts of each datapath.
std::uint64_t pinv_ops(int n, int m);
std::uint64_t svd_ops(int n, int m, int rank);
std::uint64_t fft_butterfly_slots(int n_points);
inline std::uint64_t fft_ops(int n_points) { return 4 * fft_butterfly_slots(n_points); }

/// Throws DomainError for K < 1 or an unknown method.
Resources resource_table(Method method, int k, const CalibrationTable& calib);
double fmax_for(Method method, int k, const CalibrationTable& calib);

HwCost pinv_cost(int n, int m, int k, const CalibrationTable& calib);
HwCost svd_cost(Method method, int n, int m, int rank, int k, const CalibrationTable& calib);
HwCost fft_cost(int n_points, fft::Normalization mode, const CalibrationTable& calib);

struct ComparisonSetup {
  int n = 230;
  int m = 230;
  int rank = 230;
  std::vector<int> ks{1, 6};
  int fft_points = 512;
  fft::Normalization fft_mode = fft::Normalization::Post;

  /// Shape and FFT size the calibration anchors were measured at.
  static ComparisonSetup anchored(const CalibrationTable& calib);
};

struct ComparisonRow {
  Method method = Method::Fft;
  int k = 1;
  HwCost cost;
  double time_ratio_to_fft = 1.0;
  std::optional<double> headline_ratio;  // target speed ratio, when one exists
  bool flagged = false;                  // deviates > 15% from headline_ratio
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  double tik_pinv_op_ratio = 0;     // R(2N+M) / (N M)
  double tik_pinv_cycle_ratio = 0;  // measured-shape cycle ratio at K = 1
};

inline constexpr double kHeadlineTolerance = 0.15;

Comparison compare_methods(const ComparisonSetup& setup, const CalibrationTable& calib);

}  // namespace fts::hw
