#pragma once

// Experiment harness: reference scenarios, SNR metric, precision and
// parallelism sweeps, method comparison and deterministic CSV output.

#include "ftsinv/config.hpp"
#include "ftsinv/fft.hpp"
#include "ftsinv/hwmodel.hpp"
#include "ftsinv/inversion.hpp"
#include "ftsinv/optics.hpp"
#include "ftsinv/svd.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fts::bench {

inline constexpr double kSnrCapDb = 300.0;

/// 20 log10(||x|| / ||x - x_hat||), capped at 300 dB. Throws DimensionError on
/// a length mismatch and DomainError for an all-zero reference.
double snr_db(const Eigen::VectorXd& reference, const Eigen::VectorXd& estimate);
double snr_db(const optics::Spectrum& reference, const optics::Spectrum& estimate);

struct ExperimentConfig {
  // Forward model.
  optics::Transmittance kind = optics::Transmittance::Airy;
  int n = 256;
  int m = 256;
  double bandwidth = 1.0;
  optics::OpticalParams params{1.0, 0.7};
  double opd_step = 0.15;
  double input_snr_db = 40.0;  // infinite = noiseless
  std::uint64_t seed = 1;
  std::vector<optics::GaussianComponent> components{{0.30, 0.03, 1.0}, {0.55, 0.01, 0.6}, {0.75, 0.05, 0.8}};
  double center_jitter = 0.0;

  // Methods and their parameters. Tikhonov lambdas are relative to the
  // largest singular value.
  std::vector<hw::Method> methods{hw::Method::Fft, hw::Method::Pinv, hw::Method::Tsvd, hw::Method::Tik};
  int rank = 128;
  double lambda = 1e-3;
  std::vector<int> ranks;  // empty: R/16 * {1, 2, 3, 4, 6, 8, 10, 12, 14, 16}
  std::vector<double> lambdas{1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};

  // Datapath.
  int bits = 16;
  std::optional<int> frac_bits;
  std::vector<int> bit_sweep{4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28, 30, 32};
  bool quantize_y_only = false;
  int k = 1;
  std::vector<int> k_sweep{1, 2, 3, 4, 5, 6};
  fft::Normalization fft_mode = fft::Normalization::Post;
  int twiddle_bits = 0;
  int headroom = 3;

  static ExperimentConfig from_key_values(const config::KeyValues& kv);
  /// Canonical echo; from_key_values(to_key_values()) reproduces the config.
  config::KeyValues to_key_values() const;
  static const std::vector<std::string>& keys();
  void validate() const;
  /// Configured ranks, or the automatic grid when none are given.
  std::vector<int> rank_grid() const;
};

/// Forward model instance shared by every method of a study.
struct Scenario {
  optics::TransferMatrix matrix;     // M x N on the configured OPD grid
  optics::Spectrum truth;
  optics::Interferogram measured;    // noisy
  svd::SvdFactors factors;
  Eigen::MatrixXd pinv;
  double condition_number = 0;
  // The FFT needs the DCT-compatible grid; same instrument and spectrum.
  optics::TransferMatrix dct_matrix;
  optics::Interferogram dct_measured;
};

Scenario build_scenario(const ExperimentConfig& cfg);

struct SweepRow {
  std::string method;
  std::string param_name;  // "", "rank" or "lambda"
  double param_value = 0;
  int bits = 0;            // 0 = double precision
  int k = 1;
  double snr_db = 0;
  std::uint64_t latency_cycles = 0;
  double time_us = 0;
  std::uint64_t multiplies = 0;
  std::uint64_t overflows = 0;
  int dsp = 0;
  int bram = 0;
  int lut = 0;
  std::optional<bool> matches_k1;  // parallel sweep only
};

struct SweepResult {
  std::string study;
  std::vector<SweepRow> rows;
};

/// Runs one method at one datapath width (0 = double) and K.
SweepRow run_method(const Scenario& s, const ExperimentConfig& cfg, hw::Method method,
                    const std::string& param_name, double param_value, int bits, int k,
                    Eigen::VectorXd* estimate = nullptr);

/// Every method x parameter x (double + bit_sweep) point.
SweepResult sweep_precision(const Scenario& s, const ExperimentConfig& cfg);
SweepResult sweep_precision(const ExperimentConfig& cfg);

/// Matrix methods over k_sweep at cfg.bits, with a bit-identity check
/// against K = 1.
SweepResult sweep_parallelism(const Scenario& s, const ExperimentConfig& cfg);
SweepResult sweep_parallelism(const ExperimentConfig& cfg);

/// One row per method at cfg.bits and cfg.k.
SweepResult run_comparison(const Scenario& s, const ExperimentConfig& cfg);
SweepResult run_comparison(const ExperimentConfig& cfg);

/// `#` metadata block (study, version, rounding policies, SNR definition,
/// config echo) followed by a header row and the data rows.
void write_csv(std::ostream& out, const SweepResult& result, const ExperimentConfig& cfg);

/// Cost comparison table as CSV with the same metadata conventions.
void write_costs_csv(std::ostream& out, const hw::Comparison& cmp, const hw::ComparisonSetup& setup,
                     const hw::CalibrationTable& calib);

const char* version();

}  // namespace fts::bench
