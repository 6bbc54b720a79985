#include "ftsinv/optics.hpp"

#include "ftsinv/error.hpp"

#include <random>

namespace fts::optics {

SpectralGrid SpectralGrid::make(int n, double bandwidth) {
  SpectralGrid g{n, bandwidth};
  g.validate();
  return g;
}

void SpectralGrid::validate() const {
  if (n < 2) throw DomainError("spectral grid: need at least 2 bins");
  if (!(bandwidth > 0) || !std::isfinite(bandwidth))
    throw DomainError("spectral grid: bandwidth must be positive");
}

Eigen::VectorXd SpectralGrid::midpoints() const {
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) s(i) = midpoint(i);
  return s;
}

OpdGrid OpdGrid::regular(int m, double step) {
  if (!(step > 0) || !std::isfinite(step)) throw DomainError("OPD grid: step must be positive");
  if (m < 2) throw DomainError("OPD grid: need at least 2 samples");
  OpdGrid g{Eigen::VectorXd(m), step};
  for (int k = 0; k < m; ++k) g.delta(k) = k * step;
  g.validate();
  return g;
}

OpdGrid OpdGrid::irregular(Eigen::VectorXd delta) {
  OpdGrid g{std::move(delta), std::nullopt};
  g.validate();
  return g;
}

OpdGrid OpdGrid::dct_compatible(const SpectralGrid& sg, int m) {
  sg.validate();
  return regular(m, 1.0 / (2.0 * sg.bandwidth));
}

void OpdGrid::validate() const {
  if (delta.size() < 2) throw DomainError("OPD grid: need at least 2 samples");
  for (Eigen::Index k = 0; k < delta.size(); ++k) {
    if (!std::isfinite(delta(k)) || delta(k) < 0) throw DomainError("OPD grid: negative OPD");
    if (k > 0 && !(delta(k) > delta(k - 1)))
      throw DomainError("OPD grid: OPDs must be strictly increasing");
  }
}

bool OpdGrid::is_dct_compatible(const SpectralGrid& sg) const {
  if (!step || size() != sg.n || delta(0) != 0.0) return false;
  return std::abs(2.0 * sg.bandwidth * *step - 1.0) <= 1e-12;
}

OpticalParams OpticalParams::make(double a, double r) {
  OpticalParams p{a, r};
  p.validate();
  return p;
}

void OpticalParams::validate() const {
  if (!(a > 0 && a <= 1)) throw DomainError("optical params: attenuation must be in (0, 1]");
  if (!(r >= 0 && r < 1)) throw DomainError("optical params: reflectivity must be in [0, 1)");
}

double airy_transmittance(double sigma, double delta, const OpticalParams& p) {
  if (!(p.r < 1)) throw DomainError("Airy transmittance requires r < 1");
  const double s = std::sin(std::numbers::pi * delta * sigma);
  const double one_minus_r = 1.0 - p.r;
  return p.a / (one_minus_r * one_minus_r + 4.0 * p.r * s * s);
}

double transmittance(Transmittance kind, double sigma, double delta, const OpticalParams& p) {
  return kind == Transmittance::Cosine ? cosine_transmittance(sigma, delta, p)
                                       : airy_transmittance(sigma, delta, p);
}

TransferMatrix build_transfer_matrix(const SpectralGrid& sg, const OpdGrid& og, Transmittance kind,
                                     const OpticalParams& p) {
  sg.validate();
  og.validate();
  if (kind == Transmittance::Airy && !(p.r < 1))
    throw DomainError("Airy transmittance requires r < 1");
  TransferMatrix tm{Eigen::MatrixXd(og.size(), sg.n), sg, og, kind, p};
  for (int k = 0; k < og.size(); ++k)
    for (int n = 0; n < sg.n; ++n) tm.A(k, n) = transmittance(kind, sg.midpoint(n), og.delta(k), p);
  return tm;
}

Spectrum gaussian_mixture_spectrum(const SpectralGrid& grid,
                                   const std::vector<GaussianComponent>& components,
                                   std::uint64_t seed, double center_jitter) {
  grid.validate();
  if (components.empty()) throw DomainError("gaussian mixture: no components");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-center_jitter, center_jitter);

  const double dsig = grid.bin_width();
  Spectrum x{Eigen::VectorXd::Zero(grid.n), grid};
  for (const auto& c : components) {
    if (!(c.width > 0)) throw DomainError("gaussian mixture: widths must be positive");
    const double center = c.center + jitter(rng) * dsig;
    // Bin average of amplitude * exp(-(s-c)^2 / 2w^2) over [n dsig, (n+1) dsig].
    const double scale = c.amplitude * c.width * std::sqrt(std::numbers::pi / 2.0) / dsig;
    const double inv = 1.0 / (std::numbers::sqrt2 * c.width);
    for (int n = 0; n < grid.n; ++n) {
      const double lo = n * dsig - center;
      const double hi = (n + 1) * dsig - center;
      x.values(n) += scale * (std::erf(hi * inv) - std::erf(lo * inv));
    }
  }
  return x;
}

Interferogram simulate_interferogram(const Eigen::MatrixXd& A, const OpdGrid& og,
                                     const Eigen::VectorXd& x, double noise_std,
                                     std::uint64_t seed) {
  if (A.cols() != x.size() || A.rows() != og.size())
    throw DimensionError("simulate_interferogram: matrix/grid/spectrum sizes disagree");
  if (!(noise_std >= 0)) throw DomainError("simulate_interferogram: negative noise");
  Interferogram y{A * x, og, x.sum()};
  if (noise_std > 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_std);
    for (Eigen::Index k = 0; k < y.values.size(); ++k) y.values(k) += noise(rng);
  }
  return y;
}

Interferogram simulate_interferogram(const TransferMatrix& A, const Spectrum& x, double noise_std,
                                     std::uint64_t seed) {
  if (!(x.grid == A.spectral_grid))
    throw DimensionError("simulate_interferogram: spectrum grid differs from matrix grid");
  return simulate_interferogram(A.A, A.opd_grid, x.values, noise_std, seed);
}

double noise_std_for_snr(const Eigen::VectorXd& clean, double snr_db) {
  if (clean.size() == 0) throw DimensionError("noise_std_for_snr: empty signal");
  const double rms = clean.norm() / std::sqrt(static_cast<double>(clean.size()));
  return rms * std::pow(10.0, -snr_db / 20.0);
}

Interferogram normalize_interferogram(const Interferogram& y, const OpticalParams& p,
                                      double mean_spectrum) {
  if (!(p.a > 0)) throw DomainError("normalize_interferogram: attenuation must be positive");
  if (!(p.r > 0)) throw DomainError("normalize_interferogram: r = 0 degenerates the cosine model");
  Interferogram out = y;
  out.values = ((y.values.array() / p.a - mean_spectrum) / (2.0 * p.r)).matrix();
  out.mean_spectrum = mean_spectrum;
  return out;
}

}  // namespace fts::optics
