#pragma once

// Forward model of a Fourier-transform spectrometer: wavenumber and OPD
// grids, transmittance functions, transfer-matrix construction and
// interferogram synthesis. Everything here is double precision; quantization
// happens only when data enters a datapath.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

namespace fts::optics {

/// N bins of width B/N over (0, B); bin n is represented by its midpoint
/// (2n+1)/(2N) * B.
struct SpectralGrid {
  int n = 256;
  double bandwidth = 1.0;

  static SpectralGrid make(int n, double bandwidth);
  void validate() const;

  double bin_width() const { return bandwidth / n; }
  double midpoint(int i) const { return (2.0 * i + 1.0) / (2.0 * n) * bandwidth; }
  Eigen::VectorXd midpoints() const;

  friend bool operator==(const SpectralGrid&, const SpectralGrid&) = default;
};

/// Optical path differences, non-negative and strictly increasing. A regular
/// grid carries its step.
struct OpdGrid {
  Eigen::VectorXd delta;
  std::optional<double> step;

  static OpdGrid regular(int m, double step);
  static OpdGrid irregular(Eigen::VectorXd delta);
  /// Regular grid on which the cosine model reduces to an unscaled DCT-II:
  /// step 1/(2B), starting at zero.
  static OpdGrid dct_compatible(const SpectralGrid& sg, int m);

  void validate() const;
  int size() const { return static_cast<int>(delta.size()); }
  bool is_regular() const { return step.has_value(); }
  /// True when the grid starts at zero with step 1/(2B) and has sg.n samples.
  bool is_dct_compatible(const SpectralGrid& sg) const;
};

/// Attenuation a in (0, 1], reflectivity r in [0, 1).
struct OpticalParams {
  double a = 1.0;
  double r = 0.5;

  static OpticalParams make(double a, double r);
  void validate() const;
};

enum class Transmittance { Cosine, Airy };

struct Spectrum {
  Eigen::VectorXd values;
  SpectralGrid grid;
};

struct Interferogram {
  Eigen::VectorXd values;
  OpdGrid grid;
  std::optional<double> mean_spectrum;
};

struct TransferMatrix {
  Eigen::MatrixXd A;  // M x N
  SpectralGrid spectral_grid;
  OpdGrid opd_grid;
  Transmittance kind = Transmittance::Cosine;
  OpticalParams params;
};

/// Two-wave interference term a(1 + r cos(2 pi sigma delta)).
template <class Scalar>
Scalar cosine_transmittance(Scalar sigma, Scalar delta, const OpticalParams& p) {
  using std::cos;
  return Scalar(p.a) * (Scalar(1) + Scalar(p.r) * cos(Scalar(2 * std::numbers::pi) * sigma * delta));
}

/// Fabry-Perot (Airy) transmittance a / ((1-r)^2 + 4r sin^2(pi delta sigma)).
/// Throws DomainError when r >= 1.
double airy_transmittance(double sigma, double delta, const OpticalParams& p);

double transmittance(Transmittance kind, double sigma, double delta, const OpticalParams& p);

TransferMatrix build_transfer_matrix(const SpectralGrid& sg, const OpdGrid& og, Transmittance kind,
                                     const OpticalParams& p);

struct GaussianComponent {
  double center = 0.5;  // wavenumber units
  double width = 0.05;  // standard deviation, > 0
  double amplitude = 1.0;
};

/// Bin-averaged Gaussian mixture. `seed` drives a uniform jitter of each
/// center within +/- center_jitter bins; with zero jitter the seed is inert.
Spectrum gaussian_mixture_spectrum(const SpectralGrid& grid,
                                   const std::vector<GaussianComponent>& components,
                                   std::uint64_t seed, double center_jitter = 0.0);

/// y = A x + n with n ~ N(0, noise_std^2) i.i.d., deterministic under seed.
Interferogram simulate_interferogram(const TransferMatrix& A, const Spectrum& x, double noise_std,
                                     std::uint64_t seed);

/// Same, for an explicitly supplied M x N matrix.
Interferogram simulate_interferogram(const Eigen::MatrixXd& A, const OpdGrid& og,
                                     const Eigen::VectorXd& x, double noise_std,
                                     std::uint64_t seed);

/// Noise standard deviation giving the requested input SNR (dB) on `clean`.
double noise_std_for_snr(const Eigen::VectorXd& clean, double snr_db);

/// (y_k / a - S) / (2r). Throws DomainError for r == 0.
Interferogram normalize_interferogram(const Interferogram& y, const OpticalParams& p,
                                      double mean_spectrum);

}  // namespace fts::optics
