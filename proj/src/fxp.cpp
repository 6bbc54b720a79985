#include "ftsinv/fxp.hpp"

#include "ftsinv/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace fts::fxp {

namespace {

constexpr wide_t kWideMax = ~(static_cast<wide_t>(1) << 127);
constexpr wide_t kWideMin = static_cast<wide_t>(1) << 127;

wide_t pow2(int bits) { return static_cast<wide_t>(1) << bits; }

}  // namespace

Format Format::make(int total_bits, int frac_bits) {
  Format f{total_bits, frac_bits};
  f.validate();
  return f;
}

Format Format::fitted(double max_abs, int total_bits, int headroom) {
  if (!std::isfinite(max_abs) || max_abs < 0) throw DomainError("fitted format: bad range");
  if (total_bits < 2 || total_bits > 64) throw DomainError("fitted format: bad width");
  if (max_abs == 0) return make(total_bits, total_bits - 1);
  // Integer bits so that max_abs < 2^(int_bits), one sign bit, plus headroom.
  int exp = 0;
  std::frexp(max_abs, &exp);  // max_abs in [2^(exp-1), 2^exp)
  int frac = total_bits - 1 - headroom - exp;
  // frac may legitimately be negative (very large ranges) or exceed the
  // word (tiny ranges); clamp to what a Q-format can express.
  frac = std::clamp(frac, 0, total_bits - 1);
  return make(total_bits, frac);
}

void Format::validate() const {
  if (total_bits < 2 || total_bits > 64)
    throw DomainError("fixed-point format: total_bits must be in [2, 64]");
  if (frac_bits < 0 || frac_bits > total_bits - 1)
    throw DomainError("fixed-point format: frac_bits must be in [0, total_bits - 1]");
}

std::int64_t Format::max_raw() const {
  return total_bits == 64 ? std::numeric_limits<std::int64_t>::max()
                          : (std::int64_t{1} << (total_bits - 1)) - 1;
}

std::int64_t Format::min_raw() const {
  return total_bits == 64 ? std::numeric_limits<std::int64_t>::min()
                          : -(std::int64_t{1} << (total_bits - 1));
}

double Format::lsb() const { return std::ldexp(1.0, -frac_bits); }
double Format::max_value() const { return to_real(max_raw()); }
bool Format::contains(wide_t raw) const { return raw >= min_raw() && raw <= max_raw(); }
double Format::to_real(std::int64_t raw) const {
  return std::ldexp(static_cast<double>(raw), -frac_bits);
}

std::string to_string(const Format& fmt) {
  std::ostringstream os;
  os << "Q" << (fmt.total_bits - fmt.frac_bits) << "." << fmt.frac_bits;
  return os.str();
}

std::string to_string(const RoundingPolicy& policy) {
  std::string s = policy.rounding == Rounding::Floor ? "floor" : "half-even";
  s += policy.overflow == Overflow::Saturate ? "/saturate" : "/wrap";
  return s;
}

wide_t shift_right(wide_t v, int shift, Rounding mode) {
  if (shift <= 0) return v;
  if (shift >= 127) {
    if (mode == Rounding::Floor) return v < 0 ? -1 : 0;
    return 0;
  }
  wide_t q = v >> shift;  // arithmetic shift: floor division
  if (mode == Rounding::Floor) return q;
  wide_t rem = v - (q << shift);
  wide_t half = pow2(shift - 1);
  if (rem > half || (rem == half && (q & 1) != 0)) ++q;
  return q;
}

int signed_width(wide_t v) {
  // Bits needed: one sign bit plus the magnitude bits of v (or ~v).
  unsigned __int128 u = static_cast<unsigned __int128>(v >= 0 ? v : ~v);
  int bits = 0;
  while (u != 0) {
    u >>= 1;
    ++bits;
  }
  return bits + 1;
}

wide_t realign(wide_t v, int from_frac, int to_frac, Rounding mode) {
  if (to_frac <= from_frac) return shift_right(v, from_frac - to_frac, mode);
  int up = to_frac - from_frac;
  if (v == 0) return 0;
  if (signed_width(v) + up > 127) return v > 0 ? kWideMax : kWideMin;
  return v * pow2(up);
}

std::int64_t narrow(wide_t v, int total_bits, Overflow overflow, Tally* tally) {
  const wide_t hi = pow2(total_bits - 1) - 1;
  const wide_t lo = -pow2(total_bits - 1);
  if (v >= lo && v <= hi) return static_cast<std::int64_t>(v);
  if (tally) ++tally->overflows;
  if (overflow == Overflow::Saturate) return static_cast<std::int64_t>(v > hi ? hi : lo);
  // Two's-complement wrap: keep the low total_bits bits, sign-extend.
  const unsigned __int128 mask = (static_cast<unsigned __int128>(1) << total_bits) - 1;
  unsigned __int128 low = static_cast<unsigned __int128>(v) & mask;
  wide_t r = static_cast<wide_t>(low);
  if (r > hi) r -= pow2(total_bits);
  return static_cast<std::int64_t>(r);
}

Value quantize(double x, Format fmt, RoundingPolicy policy) {
  fmt.validate();
  if (!std::isfinite(x)) throw DomainError("quantize: non-finite input");
  const double scaled = std::ldexp(x, fmt.frac_bits);  // exact
  const double rounded =
      policy.rounding == Rounding::Floor ? std::floor(scaled) : std::nearbyint(scaled);
  const double limit = std::ldexp(1.0, fmt.total_bits - 1);
  if (policy.overflow == Overflow::Saturate) {
    if (rounded >= limit) return {fmt.max_raw(), fmt};
    if (rounded < -limit) return {fmt.min_raw(), fmt};
    return {static_cast<std::int64_t>(rounded), fmt};
  }
  if (std::fabs(rounded) >= std::ldexp(1.0, 126))
    throw DomainError("quantize: magnitude too large to wrap");
  return {narrow(static_cast<wide_t>(rounded), fmt.total_bits, Overflow::Wrap), fmt};
}

Value fxp_mul(Value a, Value b, Format out_fmt, RoundingPolicy policy, Tally& tally) {
  out_fmt.validate();
  ++tally.multiplies;
  const wide_t product = static_cast<wide_t>(a.raw) * static_cast<wide_t>(b.raw);
  const wide_t aligned =
      realign(product, a.format.frac_bits + b.format.frac_bits, out_fmt.frac_bits, policy.rounding);
  return {narrow(aligned, out_fmt.total_bits, policy.overflow, &tally), out_fmt};
}

Value fxp_add(Value a, Value b, RoundingPolicy policy) {
  if (!(a.format == b.format)) throw DimensionError("fxp_add: operand formats differ");
  const wide_t sum = static_cast<wide_t>(a.raw) + static_cast<wide_t>(b.raw);
  return {narrow(sum, a.format.total_bits, policy.overflow), a.format};
}

wide_t dot_exact(std::span<const std::int64_t> a, int a_bits, std::span<const std::int64_t> b,
                 int b_bits, Tally& tally) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  const int guard = std::bit_width(a.size());
  if (a_bits + b_bits + guard > 127) throw DomainError("dot: accumulator would overflow 128 bits");
  wide_t acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += static_cast<wide_t>(a[i]) * static_cast<wide_t>(b[i]);
  tally.multiplies += a.size();
  return acc;
}

int leading_bit(std::span<const std::int64_t> block, int width) {
  int headroom = width - 1;
  for (std::int64_t v : block) {
    if (v == 0 || v == -1) continue;
    headroom = std::min(headroom, width - signed_width(v));
  }
  return headroom;
}

double BfpBlock::value(std::size_t i) const {
  return std::ldexp(static_cast<double>(mantissas[i]), exponent);
}

std::vector<double> BfpBlock::values() const {
  std::vector<double> out(mantissas.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = value(i);
  return out;
}

BfpBlock normalize_block(const BfpBlock& block, int target_headroom, Rounding rounding) {
  if (target_headroom < 0 || target_headroom > block.width - 1)
    throw DomainError("normalize_block: target headroom outside [0, W-1]");
  BfpBlock out = block;
  const bool all_zero =
      std::all_of(block.mantissas.begin(), block.mantissas.end(), [](auto v) { return v == 0; });
  if (all_zero) return out;

  const int shift = leading_bit(block.mantissas, block.width) - target_headroom;
  if (shift > 0) {
    for (auto& m : out.mantissas) m = static_cast<std::int64_t>(static_cast<wide_t>(m) << shift);
  } else if (shift < 0) {
    for (auto& m : out.mantissas)
      m = narrow(shift_right(m, -shift, rounding), block.width, Overflow::Saturate);
  }
  out.exponent = block.exponent - shift;
  return out;
}

}  // namespace fts::fxp
