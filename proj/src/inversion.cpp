#include "ftsinv/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fts::inv {

namespace {

using fxp::wide_t;

constexpr int kMaxBits = 48;  // keeps 2W + log2(M) inside the 128-bit accumulator

void check_shapes(Eigen::Index rows_expected, const optics::Interferogram& y,
                  const optics::SpectralGrid& grid, Eigen::Index n_cols, Eigen::Index m_cols) {
  if (y.values.size() != m_cols) throw DimensionError("inversion: interferogram length differs from M");
  if (grid.n != rows_expected || n_cols != rows_expected)
    throw DimensionError("inversion: operator rows differ from spectral grid size");
}

void check_k(int k, Eigen::Index n) {
  if (k < 1) throw DomainError("inversion: K must be >= 1");
  if (k > n) throw DomainError("inversion: K exceeds the number of spectral bins");
}

// W-bit words worth raw * 2^-frac; frac may be negative for block scaling.
template <class Raw>
struct Scaled {
  Raw raw;
  int bits = 0;
  int frac = 0;

  Eigen::MatrixXd real() const { return (raw.template cast<double>() * std::ldexp(1.0, -frac)).eval(); }
};

std::string describe(int bits, int frac) {
  std::ostringstream os;
  os << bits << "b*2^" << -frac;
  return os.str();
}

// Entry quantization: scaling by 2^frac is exact, so rounding is that of a
// plain integer format.
template <class Derived>
auto entry(const Eigen::MatrixBase<Derived>& m, const DatapathFormat& f) {
  const double peak = m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
  const int frac = f.frac_for(peak);
  using Raw = std::conditional_t<Derived::ColsAtCompileTime == 1, fxp::RawVector, fxp::RawMatrix>;
  Scaled<Raw> out{Raw(m.rows(), m.cols()), f.bits, frac};
  const fxp::Format word = fxp::Format::make(f.bits, 0);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.raw(i, j) = fxp::quantize(std::ldexp(m(i, j), frac), word).raw;
  return out;
}

struct WideBlock {
  std::vector<wide_t> values;
  int frac = 0;
};

// Exact dot products of each banked row with x.
WideBlock banked_matvec(const BankedOperand<fxp::RawMatrix>& a, int a_bits, int a_frac,
                        const Scaled<fxp::RawVector>& x, fxp::Tally& tally) {
  WideBlock out{std::vector<wide_t>(a.rows()), a_frac + x.frac};
  const std::span<const std::int64_t> xs(x.raw.data(), static_cast<std::size_t>(x.raw.size()));
  for (int p = 0; p < a.k(); ++p) {
    const auto& part = a.partitions[p];
    for (Eigen::Index i = 0; i < part.rows(); ++i) {
      const std::span<const std::int64_t> row(part.data() + i * part.cols(),
                                              static_cast<std::size_t>(part.cols()));
      out.values[a.first_row[p] + i] = fxp::dot_exact(row, a_bits, xs, x.bits, tally);
    }
  }
  return out;
}

double wide_max_abs(const std::vector<wide_t>& v, int frac) {
  double m = 0;
  for (wide_t w : v) m = std::max(m, std::abs(std::ldexp(static_cast<double>(w), -frac)));
  return m;
}

// Round once from the accumulator to the datapath word; returns the word's frac.
int round_into(const std::vector<wide_t>& acc, int acc_frac, const DatapathFormat& f, fxp::Tally& tally,
               std::int64_t* out) {
  const int frac = f.frac_for(wide_max_abs(acc, acc_frac));
  for (std::size_t i = 0; i < acc.size(); ++i)
    out[i] = fxp::narrow(fxp::realign(acc[i], acc_frac, frac, fxp::Rounding::Floor), f.bits,
                         fxp::Overflow::Saturate, &tally);
  return frac;
}

Eigen::VectorXd banked_matvec(const BankedOperand<Eigen::MatrixXd>& a, const Eigen::VectorXd& x,
                              std::uint64_t& multiplies) {
  Eigen::VectorXd out(a.rows());
  for (int p = 0; p < a.k(); ++p) {
    const auto& part = a.partitions[p];
    for (Eigen::Index i = 0; i < part.rows(); ++i) {
      double acc = 0;
      for (Eigen::Index j = 0; j < part.cols(); ++j) acc += part(i, j) * x(j);
      out(a.first_row[p] + i) = acc;
    }
    multiplies += static_cast<std::uint64_t>(part.size());
  }
  return out;
}

// Interferogram as seen by a y-only quantized datapath.
Eigen::VectorXd entry_quantized(const Eigen::VectorXd& y, const DatapathFormat& f, std::string& desc) {
  const auto q = entry(y, f);
  desc = "y=" + describe(q.bits, q.frac);
  return q.real();
}

void attach_cost(InversionTelemetry& t, const hw::HwCost& c) {
  t.latency_cycles = c.latency_cycles;
  t.time_us = c.time_us;
}

}  // namespace

void DatapathFormat::validate() const {
  if (bits == 0) return;
  if (bits < 2 || bits > kMaxBits) throw DomainError("datapath width must be in [2, 48] bits");
  if (frac_bits && (*frac_bits < 0 || *frac_bits > bits - 1))
    throw DomainError("datapath fraction bits must be in [0, bits - 1]");
}

int DatapathFormat::frac_for(double max_abs) const {
  if (frac_bits) return *frac_bits;
  if (max_abs == 0) return bits - 1;
  int exp = 0;
  std::frexp(max_abs, &exp);  // max_abs < 2^exp
  return bits - 1 - exp;
}

std::string DatapathFormat::describe() const {
  if (is_double()) return "double";
  std::ostringstream os;
  os << bits << "-bit";
  if (frac_bits) os << " Q" << (bits - *frac_bits) << "." << *frac_bits;
  else os << " fitted";
  if (!quantize_coefficients) os << " y-only";
  return os.str();
}

InversionResult reconstruct_pinv(const Eigen::MatrixXd& pinv, const optics::Interferogram& y,
                                 const optics::SpectralGrid& grid, const DatapathOptions& options) {
  const auto& f = options.format;
  f.validate();
  check_shapes(pinv.rows(), y, grid, grid.n, pinv.cols());
  check_k(options.k, pinv.rows());

  InversionResult r{{Eigen::VectorXd(pinv.rows()), grid}, {}};
  auto& t = r.telemetry;
  t.k = options.k;
  t.scheme = "pinv";
  t.effective_rank = static_cast<int>(std::min(pinv.rows(), pinv.cols()));

  if (f.is_double() || !f.quantize_coefficients) {
    std::string desc = "double";
    const Eigen::VectorXd yin = f.is_double() ? y.values : entry_quantized(y.values, f, desc);
    r.estimate.values = banked_matvec(bank_rows(pinv, options.k), yin, t.multiplies);
    t.format = f.is_double() ? desc : desc + " coefficients=double";
  } else {
    fxp::Tally tally;
    const auto a = entry(pinv, f);
    const auto yq = entry(y.values, f);
    const auto acc = banked_matvec(bank_rows(a.raw, options.k), a.bits, a.frac, yq, tally);
    Scaled<fxp::RawVector> out{fxp::RawVector(pinv.rows()), f.bits, 0};
    out.frac = round_into(acc.values, acc.frac, f, tally, out.raw.data());
    r.estimate.values = out.real();
    t.multiplies = tally.multiplies;
    t.overflows = tally.overflows;
    t.format = f.describe() + " A=" + describe(a.bits, a.frac) + " y=" + describe(yq.bits, yq.frac) +
               " x=" + describe(out.bits, out.frac);
  }
  attach_cost(t, hw::pinv_cost(static_cast<int>(pinv.rows()), static_cast<int>(pinv.cols()), options.k,
                               options.calibration));
  return r;
}

InversionResult reconstruct_svd(const svd::SvdFactors& factors, const svd::PenalizedDiagonal& zeta,
                                const optics::Interferogram& y, const optics::SpectralGrid& grid,
                                const DatapathOptions& options) {
  const auto& f = options.format;
  f.validate();
  const Eigen::Index n = factors.V.rows();
  const Eigen::Index m = factors.U.rows();
  if (zeta.zeta.size() != factors.xi.size() || factors.U.cols() != factors.xi.size() ||
      factors.V.cols() != factors.xi.size())
    throw DimensionError("reconstruct_svd: factor shapes disagree");
  check_shapes(n, y, grid, grid.n, m);
  check_k(options.k, n);

  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < zeta.zeta.size(); ++i)
    if (zeta.zeta(i) != 0.0) kept.push_back(i);
  const auto rank = static_cast<Eigen::Index>(kept.size());

  InversionResult r{{Eigen::VectorXd::Zero(n), grid}, {}};
  auto& t = r.telemetry;
  t.k = options.k;
  t.scheme = svd::scheme_name(zeta.scheme);
  if (const auto* tik = std::get_if<svd::Tikhonov>(&zeta.scheme)) t.lambda = tik->lambda;
  t.effective_rank = static_cast<int>(rank);
  t.format = f.describe();

  const hw::Method method =
      std::holds_alternative<svd::Tikhonov>(zeta.scheme) ? hw::Method::Tik : hw::Method::Tsvd;
  if (rank > 0)
    attach_cost(t, hw::svd_cost(method, static_cast<int>(n), static_cast<int>(m), static_cast<int>(rank),
                                options.k, options.calibration));
  if (rank == 0) return r;

  Eigen::MatrixXd Vk(n, rank), Ukt(rank, m);
  Eigen::VectorXd zk(rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    Vk.col(j) = factors.V.col(kept[j]);
    Ukt.row(j) = factors.U.col(kept[j]).transpose();
    zk(j) = zeta.zeta(kept[j]);
  }
  // Inner products against the rank dimension use at most `rank` memories.
  const int k_inner = static_cast<int>(std::min<Eigen::Index>(options.k, rank));

  if (f.is_double() || !f.quantize_coefficients) {
    std::string desc = "double";
    const Eigen::VectorXd yin = f.is_double() ? y.values : entry_quantized(y.values, f, desc);
    // O1 = V Z, one multiply per element.
    Eigen::MatrixXd o1 = Vk * zk.asDiagonal();
    t.multiplies += static_cast<std::uint64_t>(o1.size());
    const Eigen::VectorXd o2 = banked_matvec(bank_rows(Ukt, k_inner), yin, t.multiplies);
    r.estimate.values = banked_matvec(bank_rows(o1, options.k), o2, t.multiplies);
    if (!f.is_double()) t.format = desc + " coefficients=double";
    return r;
  }

  fxp::Tally tally;
  const auto v = entry(Vk, f);
  const auto z = entry(zk, f);
  const auto ut = entry(Ukt, f);
  const auto yq = entry(y.values, f);

  // O1 = V Z, element-wise products, banked over the rows of V.
  std::vector<wide_t> prod(static_cast<std::size_t>(n * rank));
  const auto vb = bank_rows(v.raw, options.k);
  for (int p = 0; p < vb.k(); ++p) {
    const auto& part = vb.partitions[p];
    for (Eigen::Index i = 0; i < part.rows(); ++i)
      for (Eigen::Index j = 0; j < rank; ++j)
        prod[(vb.first_row[p] + i) * rank + j] = static_cast<wide_t>(part(i, j)) * z.raw(j);
    tally.multiplies += static_cast<std::uint64_t>(part.size());
  }
  Scaled<fxp::RawMatrix> o1{fxp::RawMatrix(n, rank), f.bits, 0};
  o1.frac = round_into(prod, v.frac + z.frac, f, tally, o1.raw.data());

  // O2 = U^T y.
  const auto acc2 = banked_matvec(bank_rows(ut.raw, k_inner), ut.bits, ut.frac, yq, tally);
  Scaled<fxp::RawVector> o2{fxp::RawVector(rank), f.bits, 0};
  o2.frac = round_into(acc2.values, acc2.frac, f, tally, o2.raw.data());

  // x = O1 O2.
  const auto acc3 = banked_matvec(bank_rows(o1.raw, options.k), o1.bits, o1.frac, o2, tally);
  Scaled<fxp::RawVector> out{fxp::RawVector(n), f.bits, 0};
  out.frac = round_into(acc3.values, acc3.frac, f, tally, out.raw.data());
  r.estimate.values = out.real();
  t.multiplies = tally.multiplies;
  t.overflows = tally.overflows;
  t.format = f.describe() + " V=" + describe(v.bits, v.frac) + " Z=" + describe(z.bits, z.frac) +
             " U=" + describe(ut.bits, ut.frac) + " y=" + describe(yq.bits, yq.frac) +
             " x=" + describe(out.bits, out.frac);
  return r;
}

}  // namespace fts::inv
