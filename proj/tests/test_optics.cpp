#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ftsinv/error.hpp"
#include "ftsinv/fft.hpp"
#include "ftsinv/optics.hpp"

#include <random>

using namespace fts;
using namespace fts::optics;

TEST_CASE("grids") {
  const auto sg = SpectralGrid::make(4, 2.0);
  CHECK(sg.bin_width() == 0.5);
  CHECK(sg.midpoint(0) == 0.25);
  CHECK(sg.midpoint(3) == 1.75);
  CHECK_THROWS_AS(SpectralGrid::make(1, 1.0), DomainError);
  CHECK_THROWS_AS(SpectralGrid::make(4, 0.0), DomainError);

  const auto og = OpdGrid::regular(5, 0.5);
  CHECK(og.size() == 5);
  CHECK(og.delta(4) == 2.0);
  CHECK(og.is_regular());
  CHECK_THROWS_AS(OpdGrid::regular(1, 0.5), DomainError);
  CHECK_THROWS_AS(OpdGrid::regular(4, -1.0), DomainError);

  Eigen::VectorXd d(3);
  d << 0.0, 0.3, 0.2;
  CHECK_THROWS_AS(OpdGrid::irregular(d), DomainError);
  d << -0.1, 0.3, 0.5;
  CHECK_THROWS_AS(OpdGrid::irregular(d), DomainError);
  d << 0.0, 0.3, 0.5;
  CHECK_FALSE(OpdGrid::irregular(d).is_regular());

  CHECK(OpdGrid::dct_compatible(sg, 4).is_dct_compatible(sg));
  CHECK_FALSE(OpdGrid::regular(4, 0.3).is_dct_compatible(sg));
  CHECK_FALSE(OpdGrid::dct_compatible(sg, 8).is_dct_compatible(sg));
}

TEST_CASE("optical parameter validation") {
  CHECK_NOTHROW(OpticalParams::make(1.0, 0.0));
  CHECK_THROWS_AS(OpticalParams::make(0.0, 0.5), DomainError);
  CHECK_THROWS_AS(OpticalParams::make(1.5, 0.5), DomainError);
  CHECK_THROWS_AS(OpticalParams::make(1.0, 1.0), DomainError);
}

TEST_CASE("cosine transmittance examples") {
  const OpticalParams p{0.8, 0.5};
  CHECK(cosine_transmittance(0.7, 0.0, p) == doctest::Approx(0.8 * 1.5));
  CHECK(cosine_transmittance(0.7, 3.1, OpticalParams{0.8, 0.0}) == doctest::Approx(0.8));
  CHECK(cosine_transmittance(0.5, 0.5, p) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("airy transmittance examples and bounds") {
  const OpticalParams p{0.9, 0.7};
  CHECK(airy_transmittance(0.3, 1.7, OpticalParams{0.9, 0.0}) == doctest::Approx(0.9));
  CHECK(airy_transmittance(0.5, 4.0, p) == doctest::Approx(0.9 / (0.3 * 0.3)));
  CHECK(airy_transmittance(0.25, 2.0, p) == doctest::Approx(0.9 / (1.7 * 1.7)));
  CHECK_THROWS_AS(airy_transmittance(0.1, 0.1, OpticalParams{1.0, 1.0}), DomainError);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 10), ur(0, 0.99), ua(0.01, 1);
  for (int i = 0; i < 10000; ++i) {
    const OpticalParams q{ua(rng), ur(rng)};
    const double t = airy_transmittance(u(rng), u(rng), q);
    CHECK(t >= q.a / ((1 + q.r) * (1 + q.r)) * (1 - 1e-12));
    CHECK(t <= q.a / ((1 - q.r) * (1 - q.r)) * (1 + 1e-12));
  }
}

TEST_CASE("transfer matrix") {
  const OpticalParams p{0.9, 0.4};
  // The smallest valid grid; element [0][0] sits at zero OPD.
  const auto sg = SpectralGrid::make(2, 1.0);
  const auto tm = build_transfer_matrix(sg, OpdGrid::regular(2, 0.5), Transmittance::Cosine, p);
  CHECK(tm.A(0, 0) == doctest::Approx(0.9 * 1.4));
  CHECK(tm.A(0, 1) == doctest::Approx(0.9 * 1.4));

  const auto flat = build_transfer_matrix(SpectralGrid::make(5, 1.0), OpdGrid::regular(7, 0.3),
                                          Transmittance::Airy, OpticalParams{0.6, 0.0});
  CHECK(flat.A.rows() == 7);
  CHECK(flat.A.cols() == 5);
  CHECK((flat.A.array() - 0.6).abs().maxCoeff() < 1e-15);

  const auto sg6 = SpectralGrid::make(6, 1.3);
  const auto og = OpdGrid::regular(9, 0.37);
  for (auto kind : {Transmittance::Cosine, Transmittance::Airy}) {
    const auto A = build_transfer_matrix(sg6, og, kind, OpticalParams{0.8, 0.6});
    for (int k = 0; k < 9; ++k)
      for (int n = 0; n < 6; ++n) CHECK(A.A(k, n) == transmittance(kind, sg6.midpoint(n), og.delta(k), A.params));
  }
}

TEST_CASE("gaussian mixture spectrum") {
  const auto sg = SpectralGrid::make(64, 1.0);
  CHECK(gaussian_mixture_spectrum(sg, {{0.5, 0.05, 0.0}}, 1).values.isZero());
  CHECK_THROWS_AS(gaussian_mixture_spectrum(sg, {}, 1), DomainError);
  CHECK_THROWS_AS(gaussian_mixture_spectrum(sg, {{0.5, 0.0, 1.0}}, 1), DomainError);

  const auto peak = gaussian_mixture_spectrum(sg, {{sg.midpoint(20), 0.004, 1.0}}, 1);
  Eigen::Index arg;
  peak.values.maxCoeff(&arg);
  CHECK(arg == 20);

  const std::vector<GaussianComponent> comps{{0.3, 0.03, 1.0}, {0.7, 0.05, 0.5}};
  const auto a = gaussian_mixture_spectrum(sg, comps, 42, 2.0);
  const auto b = gaussian_mixture_spectrum(sg, comps, 42, 2.0);
  CHECK((a.values.array() == b.values.array()).all());
  CHECK_FALSE((gaussian_mixture_spectrum(sg, comps, 43, 2.0).values.array() == a.values.array()).all());

  // Regression values for a fixed seed and jitter.
  const auto g = gaussian_mixture_spectrum(SpectralGrid::make(8, 1.0), {{0.4, 0.1, 1.0}}, 7, 0.5);
  const double golden[8] = {0.0021450244874180557, 0.067089245867582775, 0.50230875552873644, 0.93720346944270772,
                            0.44304163122112861, 0.052032302129112654, 0.001457042769182981, 9.3469107956269693e-06};
  for (int i = 0; i < 8; ++i) CHECK(g.values(i) == doctest::Approx(golden[i]).epsilon(1e-14));
}

TEST_CASE("interferogram simulation") {
  const auto sg = SpectralGrid::make(16, 1.0);
  const auto tm = build_transfer_matrix(sg, OpdGrid::regular(20, 0.2), Transmittance::Airy, {1.0, 0.5});
  const Spectrum zero{Eigen::VectorXd::Zero(16), sg};
  CHECK(simulate_interferogram(tm, zero, 0.0, 1).values.isZero());

  // Injected identity matrix.
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(16, -1, 2);
  const auto y = simulate_interferogram(Eigen::MatrixXd::Identity(16, 16), OpdGrid::regular(16, 0.1), x, 0.0, 1);
  CHECK((y.values - x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(*y.mean_spectrum == doctest::Approx(x.sum()));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd x1(16), x2(16);
  for (int i = 0; i < 16; ++i) {
    x1(i) = u(rng);
    x2(i) = u(rng);
  }
  const auto y1 = simulate_interferogram(tm, {x1, sg}, 0.0, 1).values;
  CHECK((y1 - tm.A * x1).cwiseAbs().maxCoeff() <= 1e-12 * y1.cwiseAbs().maxCoeff());
  const auto y12 = simulate_interferogram(tm, {2.5 * x1 - 0.7 * x2, sg}, 0.0, 1).values;
  const auto y2 = simulate_interferogram(tm, {x2, sg}, 0.0, 1).values;
  CHECK((y12 - (2.5 * y1 - 0.7 * y2)).cwiseAbs().maxCoeff() <= 1e-12 * y12.cwiseAbs().maxCoeff());

  const auto n1 = simulate_interferogram(tm, {x1, sg}, 0.1, 99).values;
  const auto n2 = simulate_interferogram(tm, {x1, sg}, 0.1, 99).values;
  CHECK((n1.array() == n2.array()).all());
  CHECK_THROWS_AS(simulate_interferogram(tm, {x1, SpectralGrid::make(16, 2.0)}, 0.0, 1), DimensionError);
  CHECK_THROWS_AS(simulate_interferogram(Eigen::MatrixXd::Identity(3, 3), OpdGrid::regular(3, 1.0), x1, 0.0, 1),
                  DimensionError);
}

TEST_CASE("noise level from input SNR") {
  Eigen::VectorXd clean = Eigen::VectorXd::Constant(100, 2.0);
  CHECK(noise_std_for_snr(clean, 20.0) == doctest::Approx(0.2));
}

TEST_CASE("normalization") {
  const OpdGrid og = OpdGrid::regular(4, 0.5);
  const Interferogram flat{Eigen::VectorXd::Constant(4, 0.8 * 3.0), og, std::nullopt};
  CHECK(normalize_interferogram(flat, {0.8, 0.3}, 3.0).values.cwiseAbs().maxCoeff() < 1e-15);
  const Interferogram y{Eigen::Vector4d(1, -2, 3, 0.5), og, std::nullopt};
  const auto same = normalize_interferogram(y, {1.0, 0.5}, 0.0);
  CHECK((same.values - y.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(*same.mean_spectrum == 0.0);
  CHECK_THROWS_AS(normalize_interferogram(y, {1.0, 0.0}, 0.0), DomainError);
}

TEST_CASE("normalized cosine interferogram is half the DCT-II on the compatible grid") {
  for (int n : {4, 16, 64}) {
    const auto sg = SpectralGrid::make(n, 1.0);
    const auto tm = build_transfer_matrix(sg, OpdGrid::dct_compatible(sg, n), Transmittance::Cosine, {1.0, 0.5});
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = u(rng);
    const auto y = simulate_interferogram(tm, {x, sg}, 0.0, 1);
    const auto yt = normalize_interferogram(y, tm.params, x.sum());
    const Eigen::VectorXd dct = fft::dct2_direct(x);
    CHECK((yt.values - 0.5 * dct).cwiseAbs().maxCoeff() < 1e-12 * n);
  }
}
