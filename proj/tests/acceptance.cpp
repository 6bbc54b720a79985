// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include "ftsinv/bench.hpp"
#include "ftsinv/error.hpp"
#include "ftsinv/fft.hpp"
#include "ftsinv/hwmodel.hpp"
#include "ftsinv/inversion.hpp"
#include "ftsinv/optics.hpp"
#include "ftsinv/svd.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

using namespace fts;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << id << "  " << name << "  [" << o.detail
            << "] (" << std::fixed << std::setprecision(1) << secs << " s)" << std::endl;
  std::cout.unsetf(std::ios::floatfield);
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

// Criterion 1 -----------------------------------------------------------------

Outcome dct_equivalence() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (int n : {8, 64, 256}) {
    const auto plan = fft::FftPlan::double_precision(n);
    for (int t = 0; t < 100; ++t) {
      Eigen::VectorXd x(n);
      for (int i = 0; i < n; ++i) x(i) = u(rng);
      worst = std::max(worst, (fft::dct2_via_fft(x, plan) - fft::dct2_direct(x)).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= 1e-9, "max abs error " + fmt(worst)};
}

// Criterion 2 -----------------------------------------------------------------

Outcome fft_round_trip() {
  const auto grid = optics::SpectralGrid::make(256, 1.0);
  const auto params = optics::OpticalParams::make(0.9, 0.5);
  const auto tm = optics::build_transfer_matrix(grid, optics::OpdGrid::dct_compatible(grid, 256),
                                                optics::Transmittance::Cosine, params);
  const auto x = optics::gaussian_mixture_spectrum(grid, {{0.3, 0.03, 1.0}, {0.55, 0.01, 0.6}, {0.75, 0.05, 0.8}}, 1);
  const auto y = optics::simulate_interferogram(tm, x, 0.0, 1);
  const auto yn = optics::normalize_interferogram(y, params, x.values.sum());
  const auto xhat = fft::reconstruct_fft(yn, grid, fft::FftPlan::double_precision(256));
  const double rel = (xhat.values - x.values).norm() / x.values.norm();
  return {rel <= 1e-8, "relative error " + fmt(rel)};
}

// Criterion 3 -----------------------------------------------------------------

// Blocks of n/8 equal samples following A(1+i) i^floor(j/2), j = 0..7. The
// first two stages grow every word by the full factor 2, so the stored block
// enters stage 2 one bit below its target headroom, where the e^{-i pi/4}
// twiddle lines up both components for a growth of 1 + sqrt(2).
std::vector<fft::CWord> adversarial_input(int n, int bits, int headroom) {
  const std::int64_t a = (std::int64_t{1} << (bits - 1 - headroom)) - 1;
  const fft::CWord pattern[4] = {{a, a}, {-a, a}, {-a, -a}, {a, -a}};
  std::vector<fft::CWord> v(n);
  for (int m = 0; m < n; ++m) v[m] = pattern[(m / (n / 8)) / 2];
  return v;
}

Outcome bfp_overflow_tightness() {
  const int n = 1024, bits = 16;
  const auto plan3 = fft::FftPlan::bfp(n, bits, bits, fft::Normalization::Post, 3);
  std::mt19937_64 rng(303);
  const std::int64_t lim = (std::int64_t{1} << (bits - 1 - 3)) - 1;
  std::uniform_int_distribution<std::int64_t> u(-lim, lim);
  std::uint64_t random_overflows = 0;
  std::vector<fft::CWord> in(n);
  for (int t = 0; t < 10000; ++t) {
    for (auto& w : in) w = {u(rng), u(rng)};
    random_overflows += fft::fft_bfp(in, 0, plan3).telemetry.overflow_events;
  }
  const auto plan2 = fft::FftPlan::bfp(n, bits, bits, fft::Normalization::Post, 2);
  const auto adv2 = fft::fft_bfp(adversarial_input(n, bits, 2), 0, plan2).telemetry.overflow_events;
  const auto adv3 = fft::fft_bfp(adversarial_input(n, bits, 3), 0, plan3).telemetry.overflow_events;
  return {random_overflows == 0 && adv2 >= 1,
          "random h=3 overflows " + std::to_string(random_overflows) + ", adversarial h=2 overflows " +
              std::to_string(adv2) + ", same pattern at h=3 " + std::to_string(adv3)};
}

// Criterion 4 -----------------------------------------------------------------

Outcome bfp_monotonicity() {
  const int n = 1024;
  std::mt19937_64 rng(404);
  std::normal_distribution<double> g;
  std::vector<std::vector<std::complex<double>>> inputs(20, std::vector<std::complex<double>>(n));
  for (auto& v : inputs)
    for (auto& c : v) c = {g(rng), g(rng)};

  std::vector<std::vector<std::complex<double>>> oracle;
  for (const auto& v : inputs) oracle.push_back(fft::fft_double(v));

  std::string detail;
  bool pass = true;
  double last = -1e9;
  for (int w = 10; w <= 24; w += 2) {
    const auto plan = fft::FftPlan::bfp(n, w, w, fft::Normalization::Post, 3);
    double sig = 0, err = 0;
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      double peak = 0;
      for (const auto& c : inputs[t]) peak = std::max({peak, std::abs(c.real()), std::abs(c.imag())});
      int exp = 0;
      std::frexp(peak, &exp);
      const int frac = w - 1 - 3 - exp;
      std::vector<fft::CWord> q(n);
      for (int i = 0; i < n; ++i)
        q[i] = {std::llround(std::ldexp(inputs[t][i].real(), frac)), std::llround(std::ldexp(inputs[t][i].imag(), frac))};
      const auto est = fft::fft_bfp(q, -frac, plan).values();
      for (int i = 0; i < n; ++i) {
        sig += std::norm(oracle[t][i]);
        err += std::norm(oracle[t][i] - est[i]);
      }
    }
    const double snr = 10 * std::log10(sig / err);
    if (snr < last) pass = false;
    detail += (detail.empty() ? "" : " ") + std::to_string(w) + ":" + fmt(snr, 4);
    last = snr;
  }
  return {pass, "SNR dB " + detail};
}

// Criterion 5 -----------------------------------------------------------------

Outcome svd_factorization() {
  std::mt19937_64 rng(505);
  std::normal_distribution<double> g;
  double worst_rec = 0, worst_orth = 0, worst_sv = 0;
  const std::pair<int, int> shapes[] = {{4, 4}, {8, 5}, {5, 8}, {16, 12}, {12, 16}, {32, 32}, {48, 64}, {64, 48}};
  for (const auto& [rows, cols] : shapes) {
    for (int t = 0; t < 3; ++t) {
      Eigen::MatrixXd a(rows, cols);
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = g(rng);
      const auto f = svd::svd_factorize(a);
      const Eigen::Index r = f.xi.size();
      worst_rec = std::max(worst_rec, (f.reconstruct() - a).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff());
      worst_orth = std::max({worst_orth,
                             (f.U.transpose() * f.U - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff(),
                             (f.V.transpose() * f.V - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff()});
      const Eigen::MatrixXd gram = rows >= cols ? Eigen::MatrixXd(a.transpose() * a) : Eigen::MatrixXd(a * a.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
      const Eigen::VectorXd ev = eig.eigenvalues().reverse().cwiseMax(0).cwiseSqrt();
      for (Eigen::Index i = 0; i < r; ++i) worst_sv = std::max(worst_sv, std::abs(ev(i) - f.xi(i)) / f.xi(i));
    }
  }
  return {worst_rec <= 1e-9 && worst_orth <= 1e-10 && worst_sv <= 1e-8,
          "reconstruction " + fmt(worst_rec) + ", orthogonality " + fmt(worst_orth) + ", singular values " +
              fmt(worst_sv)};
}

// Criteria 6-8, 12, 13 share the reference scenario --------------------------

const bench::ExperimentConfig& reference_config() {
  static const bench::ExperimentConfig cfg = [] {
    bench::ExperimentConfig c;  // Airy, N = M = 256, r = 0.7, 40 dB, seed 1
    return c;
  }();
  return cfg;
}

const bench::Scenario& reference_scenario() {
  static const bench::Scenario s = bench::build_scenario(reference_config());
  return s;
}

inv::DatapathOptions options(inv::DatapathFormat f, int k = 1) {
  inv::DatapathOptions o;
  o.format = f;
  o.k = k;
  return o;
}

Outcome special_case_collapse() {
  const auto& s = reference_scenario();
  const auto& xi = s.factors.xi;
  const auto pinv = svd::penalize(xi, svd::Pinv{});
  const auto tsvd = svd::penalize(xi, svd::Tsvd{static_cast<int>(xi.size())});
  const auto tik0 = svd::penalize(xi, svd::Tikhonov{0.0});
  const bool exact = pinv.zeta == tsvd.zeta && pinv.zeta == tik0.zeta;

  const auto opts = options(inv::DatapathFormat::double_precision());
  const auto xp = inv::reconstruct_pinv(s.pinv, s.measured, s.truth.grid, opts).estimate.values;
  const auto xs = inv::reconstruct_svd(s.factors, pinv, s.measured, s.truth.grid, opts).estimate.values;
  const auto xt = inv::reconstruct_svd(s.factors, tsvd, s.measured, s.truth.grid, opts).estimate.values;
  const auto xk = inv::reconstruct_svd(s.factors, tik0, s.measured, s.truth.grid, opts).estimate.values;
  const double rel = std::max({(xs - xp).norm(), (xt - xp).norm(), (xk - xp).norm()}) / xp.norm();
  return {exact && rel <= 1e-10, std::string("zeta identical: ") + (exact ? "yes" : "no") +
                                     ", reconstruction spread " + fmt(rel)};
}

Outcome op_count_exactness() {
  std::mt19937_64 rng(707);
  int mismatches = 0;
  for (int t = 0; t < 20; ++t) {
    const int n = std::uniform_int_distribution<int>(4, 64)(rng);
    const int m = std::uniform_int_distribution<int>(4, 64)(rng);
    const int rank = std::uniform_int_distribution<int>(1, std::min(n, m))(rng);
    const int k = std::uniform_int_distribution<int>(1, std::min(n, 6))(rng);
    const auto grid = optics::SpectralGrid::make(n, 1.0);
    const auto tm = optics::build_transfer_matrix(grid, optics::OpdGrid::regular(m, 0.2), optics::Transmittance::Airy,
                                                  optics::OpticalParams::make(1.0, 0.5));
    const auto f = svd::svd_factorize(tm.A);
    const auto x = optics::gaussian_mixture_spectrum(grid, {{0.5, 0.1, 1.0}}, t);
    const auto y = optics::simulate_interferogram(tm, x, 0.01, t);
    for (auto fmt_ : {inv::DatapathFormat::fixed(16), inv::DatapathFormat::double_precision()}) {
      const auto p = inv::reconstruct_pinv(svd::pinv_matrix(f), y, grid, options(fmt_, k));
      if (p.telemetry.multiplies != static_cast<std::uint64_t>(n) * m) ++mismatches;
      for (const svd::Scheme sch : {svd::Scheme{svd::Tsvd{rank}}, svd::Scheme{svd::Tikhonov{0.01 * f.xi(0)}}}) {
        const auto z = svd::penalize(f.xi, sch);
        const auto r = inv::reconstruct_svd(f, z, y, grid, options(fmt_, k));
        const auto rr = static_cast<std::uint64_t>(z.effective_rank());
        if (r.telemetry.multiplies != rr * (2 * static_cast<std::uint64_t>(n) + m)) ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 20 configurations"};
}

Outcome k_invariance() {
  const auto& s = reference_scenario();
  const auto f = inv::DatapathFormat::fixed(16);
  const svd::PenalizedDiagonal zs[] = {svd::penalize(s.factors.xi, svd::Tsvd{128}),
                                       svd::penalize(s.factors.xi, svd::Tikhonov{0.03 * s.factors.xi(0)})};
  const auto p1 = inv::reconstruct_pinv(s.pinv, s.measured, s.truth.grid, options(f, 1)).estimate.values;
  std::vector<Eigen::VectorXd> s1;
  for (const auto& z : zs) s1.push_back(inv::reconstruct_svd(s.factors, z, s.measured, s.truth.grid, options(f, 1)).estimate.values);
  int differing = 0;
  for (int k = 2; k <= 6; ++k) {
    if (inv::reconstruct_pinv(s.pinv, s.measured, s.truth.grid, options(f, k)).estimate.values != p1) ++differing;
    for (std::size_t i = 0; i < 2; ++i)
      if (inv::reconstruct_svd(s.factors, zs[i], s.measured, s.truth.grid, options(f, k)).estimate.values != s1[i])
        ++differing;
  }
  return {differing == 0, std::to_string(differing) + " of 15 runs differ from K=1"};
}

// Criteria 9-11 ---------------------------------------------------------------

Outcome anchor_fidelity() {
  const auto calib = hw::CalibrationTable::builtin();
  const auto pf = hw::pinv_fit(calib);
  const auto sf = hw::svd_fit(calib);
  const double ops = static_cast<double>(hw::pinv_ops(calib.reference_n, calib.reference_m));
  const double ratio = static_cast<double>(pf.cycles(ops, 1)) / static_cast<double>(pf.cycles(ops, 6));
  const bool pass = pf.max_abs_residual <= 0.05 && sf.max_abs_residual <= 0.05 && std::abs(ratio / 5.68 - 1) <= 0.10;
  return {pass, "pinv max residual " + fmt(pf.max_abs_residual) + ", svd max residual " + fmt(sf.max_abs_residual) +
                    ", pinv K1/K6 " + fmt(ratio)};
}

Outcome headline_ratios() {
  const auto calib = hw::CalibrationTable::builtin();
  const auto cmp = hw::compare_methods(hw::ComparisonSetup::anchored(calib), calib);
  const std::map<std::pair<hw::Method, int>, std::pair<double, double>> bounds{
      {{hw::Method::Pinv, 1}, {6.8, 9.2}},
      {{hw::Method::Tik, 1}, {20.4, 27.6}},
      {{hw::Method::Pinv, 6}, {1.27, 1.73}},
      {{hw::Method::Tik, 6}, {2.72, 3.68}}};
  bool pass = true;
  std::string detail;
  int seen = 0;
  for (const auto& row : cmp.rows) {
    const auto it = bounds.find({row.method, row.k});
    if (it == bounds.end()) continue;
    ++seen;
    const double r = row.time_ratio_to_fft;
    if (r < it->second.first || r > it->second.second) pass = false;
    detail += (detail.empty() ? "" : ", ") + std::string(hw::to_string(row.method)) + "/K" + std::to_string(row.k) +
              " " + fmt(r);
  }
  return {pass && seen == 4, detail};
}

Outcome resource_anchors() {
  const auto calib = hw::CalibrationTable::builtin();
  bool pass = hw::resource_table(hw::Method::Fft, 1, calib) == hw::Resources{5, 3, 5540};
  for (int k = 1; k <= 6; ++k) {
    const auto p = hw::resource_table(hw::Method::Pinv, k, calib);
    pass = pass && p.dsp == k && p.bram == 27;
    for (auto m : {hw::Method::Tsvd, hw::Method::Tik}) {
      const auto s = hw::resource_table(m, k, calib);
      pass = pass && s.dsp == 2 * k && s.bram >= 73 && s.bram <= 78;
    }
  }
  pass = pass && hw::resource_table(hw::Method::Tik, 1, calib).bram == 73 &&
         hw::resource_table(hw::Method::Tik, 6, calib).bram == 78;
  return {pass, "fft 5/3, pinv K/27, tsvd-tik 2K/73..78"};
}

// Criteria 12-13 --------------------------------------------------------------

struct Curve {
  std::string label;
  double param = 0;
  std::vector<int> bits;
  std::vector<double> snr;  // over bits
  double double_snr = 0;

  double plateau() const { return snr.back(); }
  int bits_to_plateau(double within) const {
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (snr[i] >= plateau() - within) return bits[i];
    return bits.back();
  }
  bool monotone_then_plateau() const {
    bool reached = false;
    for (std::size_t i = 0; i < snr.size(); ++i) {
      if (!reached && i > 0 && snr[i] < snr[i - 1]) return false;
      if (std::abs(snr[i] - plateau()) <= 2.0) reached = true;
      else if (reached) return false;
    }
    return true;
  }
  std::string describe() const {
    std::string s = label;
    for (std::size_t i = 0; i < bits.size(); ++i) s += " " + std::to_string(bits[i]) + ":" + fmt(snr[i], 4);
    return s;
  }
};

struct Study {
  Curve fft, pinv, tsvd, tik;
  std::vector<Curve> tik_all;
  double condition = 0;
};

const Study& quality_study() {
  static const Study study = [] {
    const auto& cfg = reference_config();
    const auto& s = reference_scenario();
    auto curve = [&](hw::Method m, const std::string& name, double value) {
      Curve c{hw::to_string(m), value, cfg.bit_sweep, {}, 0};
      c.double_snr = bench::run_method(s, cfg, m, name, value, 0, 1).snr_db;
      for (int b : cfg.bit_sweep) c.snr.push_back(bench::run_method(s, cfg, m, name, value, b, 1).snr_db);
      return c;
    };
    Study out;
    out.condition = s.condition_number;
    out.fft = curve(hw::Method::Fft, "", 0);
    out.pinv = curve(hw::Method::Pinv, "", 0);
    bool first = true;
    for (int r : cfg.rank_grid()) {
      auto c = curve(hw::Method::Tsvd, "rank", r);
      if (first || c.plateau() > out.tsvd.plateau()) out.tsvd = c;
      first = false;
    }
    for (double l : cfg.lambdas) {
      out.tik_all.push_back(curve(hw::Method::Tik, "lambda", l));
      if (out.tik_all.size() == 1 || out.tik_all.back().plateau() > out.tik.plateau()) out.tik = out.tik_all.back();
    }
    out.tsvd.label = "tsvd(rank=" + fmt(out.tsvd.param) + ")";
    out.tik.label = "tik(lambda=" + fmt(out.tik.param) + ")";
    return out;
  }();
  return study;
}

Outcome quality_shape() {
  const auto& st = quality_study();
  std::cout << "      condition number " << fmt(st.condition) << "\n";
  for (const auto* c : {&st.fft, &st.pinv, &st.tsvd, &st.tik})
    std::cout << "      " << c->describe() << " | double " << fmt(c->double_snr, 4) << "\n";

  const bool cond_ok = st.condition >= 1e6;
  const bool a = st.pinv.monotone_then_plateau() && st.tsvd.monotone_then_plateau() && st.tik.monotone_then_plateau();
  const bool b = st.tik.plateau() > st.tsvd.plateau() && st.tsvd.plateau() >= st.pinv.plateau() &&
                 st.pinv.plateau() > st.fft.plateau();
  const int bits_pinv = st.pinv.bits_to_plateau(1.0);
  const int bits_tik = st.tik.bits_to_plateau(1.0);
  const bool c = bits_tik > bits_pinv;
  std::ostringstream d;
  d << "kappa>=1e6 " << (cond_ok ? "yes" : "no") << "; (a) monotone-then-plateau " << (a ? "yes" : "no")
    << "; (b) plateaus tik " << fmt(st.tik.plateau()) << " tsvd " << fmt(st.tsvd.plateau()) << " pinv "
    << fmt(st.pinv.plateau()) << " fft " << fmt(st.fft.plateau()) << " ordering " << (b ? "yes" : "no")
    << "; (c) bits to 1 dB tik " << bits_tik << " pinv " << bits_pinv << " " << (c ? "yes" : "no");
  return {cond_ok && a && b && c, d.str()};
}

Outcome regularization_benefit() {
  const auto& st = quality_study();
  double best = -1e9, best_lambda = 0;
  for (const auto& c : st.tik_all)
    if (c.double_snr > best) {
      best = c.double_snr;
      best_lambda = c.param;
    }
  return {best >= st.pinv.double_snr + 10.0, "best tik " + fmt(best) + " dB at lambda " + fmt(best_lambda) +
                                                 " vs pinv " + fmt(st.pinv.double_snr) + " dB (double precision)"};
}

}  // namespace

int main() {
  run(1, "DCT-II via FFT equals the direct sum", dct_equivalence);
  run(2, "FFT round trip on the cosine model", fft_round_trip);
  run(3, "BFP post-normalization overflow tightness", bfp_overflow_tightness);
  run(4, "BFP accuracy non-decreasing in width", bfp_monotonicity);
  run(5, "Jacobi SVD factorization quality", svd_factorization);
  run(6, "TSVD full rank and Tikhonov zero collapse to PINV", special_case_collapse);
  run(7, "Live multiply counters equal the closed forms", op_count_exactness);
  run(8, "Reconstruction bit-identical for K = 1..6", k_invariance);
  run(9, "Latency fit reproduces the anchor sweeps", anchor_fidelity);
  run(10, "Speed ratios against the FFT", headline_ratios);
  run(11, "Resource table anchors", resource_anchors);
  run(12, "Quality study shape, ordering and bit demand", quality_shape);
  run(13, "Regularization gains at least 10 dB over PINV", regularization_benefit);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
