#include "ftsinv/fft.hpp"

#include "ftsinv/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>

namespace fts::fft {

namespace {

using fxp::wide_t;

// Pipeline refill between stages while the leading-bit detector settles.
constexpr std::uint64_t kStageDrainCycles = 2;

int word_headroom(std::int64_t v, int width) {
  if (v == 0 || v == -1) return width - 1;
  return width - fxp::signed_width(v);
}

int word_headroom(CWord w, int width) {
  return std::min(word_headroom(w.re, width), word_headroom(w.im, width));
}

bool is_zero(CWord w) { return w.re == 0 && w.im == 0; }

std::int64_t apply_shift(std::int64_t v, int shift, int width, fxp::Tally& tally) {
  if (shift > 0) return fxp::narrow(static_cast<wide_t>(v) << shift, width, fxp::Overflow::Saturate, &tally);
  if (shift < 0) return static_cast<std::int64_t>(fxp::shift_right(v, -shift, fxp::Rounding::Floor));
  return v;
}

CWord apply_shift(CWord w, int shift, int width, fxp::Tally& tally) {
  return {apply_shift(w.re, shift, width, tally), apply_shift(w.im, shift, width, tally)};
}

int bit_reverse(int i, int bits) {
  int r = 0;
  for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1) << (bits - 1 - b);
  return r;
}

void check_power_of_two(int n) {
  if (n < 2 || !std::has_single_bit(static_cast<unsigned>(n)))
    throw DomainError("FFT size must be a power of two >= 2");
}

// Pack exact intermediates into W-bit words with at least `headroom`
// redundant sign bits, returning the adjusted block exponent.
int pack_block(const std::vector<wide_t>& re, const std::vector<wide_t>& im, int exponent,
               int width, int headroom, std::vector<CWord>& out) {
  int widest = 1;
  for (std::size_t i = 0; i < re.size(); ++i)
    widest = std::max({widest, fxp::signed_width(re[i]), fxp::signed_width(im[i])});
  out.resize(re.size());
  const bool all_zero = std::all_of(re.begin(), re.end(), [](wide_t v) { return v == 0; }) &&
                        std::all_of(im.begin(), im.end(), [](wide_t v) { return v == 0; });
  const int shift = all_zero ? 0 : widest - (width - headroom);
  for (std::size_t i = 0; i < re.size(); ++i) {
    wide_t r = shift >= 0 ? fxp::shift_right(re[i], shift, fxp::Rounding::Floor) : re[i] << -shift;
    wide_t m = shift >= 0 ? fxp::shift_right(im[i], shift, fxp::Rounding::Floor) : im[i] << -shift;
    out[i] = {fxp::narrow(r, width, fxp::Overflow::Saturate), fxp::narrow(m, width, fxp::Overflow::Saturate)};
  }
  return exponent + shift;
}

struct QuarterTwiddle {
  std::int64_t c;  // cos(pi k / 2N)
  std::int64_t s;  // sin(pi k / 2N)
};

QuarterTwiddle quarter_twiddle(int k, int n, fxp::Format fmt) {
  const double theta = std::numbers::pi * k / (2.0 * n);
  return {fxp::quantize(std::cos(theta), fmt).raw, fxp::quantize(std::sin(theta), fmt).raw};
}

void check_plan_size(const Eigen::VectorXd& v, const FftPlan& plan) {
  if (v.size() != plan.n_points) throw DimensionError("DCT length differs from plan size");
}

}  // namespace

const char* to_string(Normalization mode) {
  switch (mode) {
    case Normalization::Pre: return "pre";
    case Normalization::Post: return "post";
    case Normalization::Fixed: return "fixed";
  }
  return "?";
}

Normalization parse_normalization(const std::string& name) {
  if (name == "pre") return Normalization::Pre;
  if (name == "post") return Normalization::Post;
  if (name == "fixed") return Normalization::Fixed;
  throw ConfigError("unknown FFT normalization mode: " + name);
}

FftPlan FftPlan::double_precision(int n_points) {
  check_power_of_two(n_points);
  FftPlan p;
  p.n_points = n_points;
  p.stages = std::countr_zero(static_cast<unsigned>(n_points));
  p.precision = Precision::Double;
  return p;
}

FftPlan FftPlan::bfp(int n_points, int data_bits, int twiddle_bits, Normalization mode,
                     int headroom_bits) {
  check_power_of_two(n_points);
  if (twiddle_bits <= 0) twiddle_bits = data_bits;
  if (data_bits < 4 || data_bits > 60) throw DomainError("FFT data width must be in [4, 60]");
  if (twiddle_bits < 3 || twiddle_bits > 60) throw DomainError("FFT twiddle width must be in [3, 60]");
  if (headroom_bits < 1 || headroom_bits > data_bits - 2)
    throw DomainError("FFT headroom must be in [1, data_bits - 2]");
  FftPlan p;
  p.n_points = n_points;
  p.stages = std::countr_zero(static_cast<unsigned>(n_points));
  p.precision = Precision::Bfp;
  p.data_bits = data_bits;
  p.twiddle_format = fxp::Format::make(twiddle_bits, twiddle_bits - 2);
  p.mode = mode;
  p.headroom_bits = headroom_bits;
  p.twiddles.resize(n_points / 2);
  for (int k = 0; k < n_points / 2; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / n_points;
    p.twiddles[k] = {fxp::quantize(std::cos(theta), p.twiddle_format).raw,
                     fxp::quantize(-std::sin(theta), p.twiddle_format).raw};
  }
  return p;
}

BankAddress bank_map(int logical_index, int stage, int n_points) {
  if (logical_index < 0 || logical_index >= n_points)
    throw DomainError("bank_map: index out of range");
  if (stage < 0 || (1 << stage) >= n_points) throw DomainError("bank_map: stage out of range");
  return {std::popcount(static_cast<unsigned>(logical_index)) & 1, logical_index >> 1};
}

void FftTelemetry::absorb(const FftTelemetry& other) {
  stage_exponents.insert(stage_exponents.end(), other.stage_exponents.begin(),
                         other.stage_exponents.end());
  multiplies += other.multiplies;
  butterflies += other.butterflies;
  cycles += other.cycles;
  overflow_events += other.overflow_events;
  bank_conflicts += other.bank_conflicts;
}

ButterflyOutput butterfly_radix2(CWord a, CWord b, CWord w, int data_bits, int twiddle_frac,
                                 fxp::Tally& tally) {
  tally.multiplies += 4;
  const wide_t pr = static_cast<wide_t>(w.re) * b.re - static_cast<wide_t>(w.im) * b.im;
  const wide_t pi = static_cast<wide_t>(w.re) * b.im + static_cast<wide_t>(w.im) * b.re;
  const wide_t ar = static_cast<wide_t>(a.re) << twiddle_frac;
  const wide_t ai = static_cast<wide_t>(a.im) << twiddle_frac;
  auto out = [&](wide_t v) {
    return fxp::narrow(fxp::shift_right(v, twiddle_frac, fxp::Rounding::Floor), data_bits,
                       fxp::Overflow::Saturate, &tally);
  };
  return {{out(ar + pr), out(ai + pi)}, {out(ar - pr), out(ai - pi)}};
}

std::vector<std::complex<double>> BfpFftResult::values() const {
  std::vector<std::complex<double>> v(mantissas.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = {std::ldexp(static_cast<double>(mantissas[i].re), exponent),
            std::ldexp(static_cast<double>(mantissas[i].im), exponent)};
  return v;
}

BfpFftResult fft_bfp(std::span<const CWord> input, int input_exponent, const FftPlan& plan) {
  if (plan.precision != Precision::Bfp) throw DomainError("fft_bfp needs a BFP plan");
  const int n = plan.n_points;
  if (static_cast<int>(input.size()) != n) throw DimensionError("fft_bfp: input length differs from plan");
  const int width = plan.data_bits;
  const int target = plan.headroom_bits;

  int head = width - 1;
  bool zero = true;
  for (const auto& w : input) {
    head = std::min(head, word_headroom(w, width));
    zero = zero && is_zero(w);
  }
  if (head < target) throw DomainError("fft_bfp: input has insufficient headroom");

  // Two banks; the load writes the bit-reversed permutation.
  std::array<std::vector<CWord>, 2> banks{std::vector<CWord>(n / 2), std::vector<CWord>(n / 2)};
  for (int i = 0; i < n; ++i) {
    const auto loc = bank_map(bit_reverse(i, plan.stages), 0, n);
    banks[loc.bank][loc.address] = input[i];
  }

  fxp::Tally tally;
  FftTelemetry tele;
  int exponent = input_exponent;

  for (int s = 0; s < plan.stages; ++s) {
    const int half = 1 << s;
    const int twiddle_step = n / (2 * half);

    // Shift decided from the leading bit recorded at the end of stage s-1.
    int shift = 0;
    if (plan.mode == Normalization::Fixed) shift = -1;
    else if (!zero) shift = head - target;

    if (plan.mode == Normalization::Pre && shift != 0) {
      for (auto& bank : banks)
        for (auto& w : bank) w = apply_shift(w, shift, width, tally);
    }
    const int out_shift = plan.mode == Normalization::Pre ? 0 : shift;

    int next_head = width - 1;
    bool next_zero = true;
    for (int group = 0; group < n; group += 2 * half) {
      for (int k = 0; k < half; ++k) {
        const int i0 = group + k;
        const int i1 = butterfly_partner(i0, s);
        const auto l0 = bank_map(i0, s, n);
        const auto l1 = bank_map(i1, s, n);
        if (l0.bank == l1.bank) ++tele.bank_conflicts;
        auto bf = butterfly_radix2(banks[l0.bank][l0.address], banks[l1.bank][l1.address],
                                   plan.twiddles[k * twiddle_step], width, plan.twiddle_frac(), tally);
        if (out_shift != 0) {
          bf.upper = apply_shift(bf.upper, out_shift, width, tally);
          bf.lower = apply_shift(bf.lower, out_shift, width, tally);
        }
        banks[l0.bank][l0.address] = bf.upper;
        banks[l1.bank][l1.address] = bf.lower;
        next_head = std::min({next_head, word_headroom(bf.upper, width), word_headroom(bf.lower, width)});
        next_zero = next_zero && is_zero(bf.upper) && is_zero(bf.lower);
        ++tele.butterflies;
      }
    }
    exponent -= shift;
    head = next_head;
    zero = next_zero;
    tele.stage_exponents.push_back(exponent);
  }

  BfpFftResult result;
  result.mantissas.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto loc = bank_map(i, 0, n);
    result.mantissas[i] = banks[loc.bank][loc.address];
  }
  result.exponent = exponent;
  result.gamma_total = exponent - input_exponent;
  tele.multiplies = tally.multiplies;
  tele.overflow_events = tally.overflows;
  tele.cycles = tele.butterflies * static_cast<std::uint64_t>(plan.initiation_interval()) +
                kStageDrainCycles * static_cast<std::uint64_t>(plan.stages);
  result.telemetry = std::move(tele);
  return result;
}

std::vector<std::complex<double>> fft_double(std::span<const std::complex<double>> input) {
  const int n = static_cast<int>(input.size());
  check_power_of_two(n);
  const int stages = std::countr_zero(static_cast<unsigned>(n));
  std::vector<std::complex<double>> data(n);
  for (int i = 0; i < n; ++i) data[bit_reverse(i, stages)] = input[i];
  for (int s = 0; s < stages; ++s) {
    const int half = 1 << s;
    for (int k = 0; k < half; ++k) {
      const auto w = std::polar(1.0, -std::numbers::pi * k / half);
      for (int group = 0; group < n; group += 2 * half) {
        const auto a = data[group + k];
        const auto b = w * data[group + k + half];
        data[group + k] = a + b;
        data[group + k + half] = a - b;
      }
    }
  }
  return data;
}

Eigen::VectorXd dct2_direct(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd X = Eigen::VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      X(k) += x(i) * std::cos(std::numbers::pi * k * (2.0 * i + 1.0) / (2.0 * n));
  return X;
}

Eigen::VectorXd dct2_via_fft(const Eigen::VectorXd& x, const FftPlan& plan, FftTelemetry* telemetry) {
  check_plan_size(x, plan);
  const int n = plan.n_points;

  if (plan.precision == Precision::Double) {
    std::vector<std::complex<double>> v(n);
    for (int i = 0; i < n / 2; ++i) {
      v[i] = x(2 * i);
      v[n - 1 - i] = x(2 * i + 1);
    }
    const auto V = fft_double(v);
    Eigen::VectorXd X(n);
    for (int k = 0; k < n; ++k)
      X(k) = (std::polar(1.0, -std::numbers::pi * k / (2.0 * n)) * V[k]).real();
    return X;
  }

  const int width = plan.data_bits;
  const auto fmt = fxp::Format::fitted(x.cwiseAbs().maxCoeff(), width, plan.headroom_bits);
  std::vector<CWord> v(n);
  for (int i = 0; i < n / 2; ++i) {
    v[i] = {fxp::quantize(x(2 * i), fmt).raw, 0};
    v[n - 1 - i] = {fxp::quantize(x(2 * i + 1), fmt).raw, 0};
  }
  auto spectrum = fft_bfp(v, -fmt.frac_bits, plan);

  // Post-twiddle, real part only: Re((Vr + jVi)(c - js)) = Vr c + Vi s.
  fxp::Tally tally;
  std::vector<wide_t> re(n), im(n, 0);
  for (int k = 0; k < n; ++k) {
    const auto tw = quarter_twiddle(k, n, plan.twiddle_format);
    const auto& V = spectrum.mantissas[k];
    re[k] = static_cast<wide_t>(V.re) * tw.c + static_cast<wide_t>(V.im) * tw.s;
    tally.multiplies += 2;
  }
  std::vector<CWord> packed;
  const int exponent = pack_block(re, im, spectrum.exponent - plan.twiddle_frac(), width, 0, packed);

  if (telemetry) {
    telemetry->absorb(spectrum.telemetry);
    telemetry->multiplies += tally.multiplies;
  }
  Eigen::VectorXd X(n);
  for (int k = 0; k < n; ++k) X(k) = std::ldexp(static_cast<double>(packed[k].re), exponent);
  return X;
}

Eigen::VectorXd idct2_via_fft(const Eigen::VectorXd& X, const FftPlan& plan, FftTelemetry* telemetry) {
  check_plan_size(X, plan);
  const int n = plan.n_points;
  Eigen::VectorXd v(n);

  if (plan.precision == Precision::Double) {
    // V_k = e^{j pi k / 2N} (X_k - j X_{N-k}); v = IFFT(V) via conj(FFT(conj V)) / N.
    std::vector<std::complex<double>> V(n);
    for (int k = 0; k < n; ++k) {
      const double xnk = k == 0 ? 0.0 : X(n - k);
      V[k] = std::conj(std::polar(1.0, std::numbers::pi * k / (2.0 * n)) * std::complex<double>(X(k), -xnk));
    }
    const auto t = fft_double(V);
    for (int i = 0; i < n; ++i) v(i) = t[i].real() / n;
  } else {
    const int width = plan.data_bits;
    const auto fmt = fxp::Format::fitted(X.cwiseAbs().maxCoeff(), width, 0);
    fxp::RawVector q(n);
    for (int k = 0; k < n; ++k) q(k) = fxp::quantize(X(k), fmt).raw;

    fxp::Tally tally;
    std::vector<wide_t> re(n), im(n);
    for (int k = 0; k < n; ++k) {
      const auto tw = quarter_twiddle(k, n, plan.twiddle_format);
      const wide_t xk = q(k);
      const wide_t xnk = k == 0 ? 0 : q(n - k);
      re[k] = tw.c * xk + tw.s * xnk;
      im[k] = -(tw.s * xk - tw.c * xnk);  // conjugated for the forward-FFT inverse
      tally.multiplies += 4;
    }
    std::vector<CWord> block;
    const int exponent =
        pack_block(re, im, -fmt.frac_bits - plan.twiddle_frac(), width, plan.headroom_bits, block);
    auto t = fft_bfp(block, exponent, plan);
    if (telemetry) {
      telemetry->absorb(t.telemetry);
      telemetry->multiplies += tally.multiplies;
    }
    for (int i = 0; i < n; ++i)
      v(i) = std::ldexp(static_cast<double>(t.mantissas[i].re), t.exponent - plan.stages);
  }

  Eigen::VectorXd x(n);
  for (int i = 0; i < n / 2; ++i) {
    x(2 * i) = v(i);
    x(2 * i + 1) = v(n - 1 - i);
  }
  return x;
}

optics::Spectrum reconstruct_fft(const optics::Interferogram& normalized,
                                 const optics::SpectralGrid& grid, const FftPlan& plan,
                                 FftTelemetry* telemetry) {
  grid.validate();
  if (!normalized.grid.is_regular())
    throw DomainError("FFT inversion needs a regularly sampled interferogram");
  if (normalized.grid.size() != grid.n)
    throw DimensionError("FFT inversion needs as many OPD samples as spectral bins");
  if (grid.n != plan.n_points) throw DimensionError("FFT inversion: plan size differs from N");
  if (!normalized.grid.is_dct_compatible(grid))
    throw DomainError("FFT inversion needs OPD step 1/(2B) starting at zero");
  return {2.0 * idct2_via_fft(normalized.values, plan, telemetry), grid};
}

}  // namespace fts::fft
