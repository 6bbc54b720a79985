#pragma once

// Bit-exact fixed-point and block-floating-point arithmetic.
//
// Every datapath in the library (butterflies, MACs, coefficient storage) is
// expressed with the primitives below. Raw words are two's-complement
// integers of up to 64 bits; products and accumulations are carried exactly
// in 128-bit intermediates and rounded once where the hardware would.

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fts::fxp {

using wide_t = __int128;

/// Signed two's-complement Q-format: `total_bits` wide, `frac_bits` of which
/// are fractional. Real value of a raw word is raw * 2^-frac_bits.
struct Format {
  int total_bits = 16;
  int frac_bits = 15;

  /// Validating constructor; throws DomainError when the format is malformed.
  static Format make(int total_bits, int frac_bits);

  /// Widest-precision format of `total_bits` whose range still covers
  /// `max_abs` while leaving `headroom` redundant sign bits. A zero range maps
  /// to frac_bits = total_bits - 1.
  static Format fitted(double max_abs, int total_bits, int headroom = 0);

  void validate() const;

  std::int64_t max_raw() const;
  std::int64_t min_raw() const;
  double lsb() const;
  double max_value() const;
  bool contains(wide_t raw) const;
  double to_real(std::int64_t raw) const;

  friend bool operator==(const Format&, const Format&) = default;
};

std::string to_string(const Format& fmt);

enum class Rounding { Floor, HalfEven };
enum class Overflow { Saturate, Wrap };

struct RoundingPolicy {
  Rounding rounding = Rounding::HalfEven;
  Overflow overflow = Overflow::Saturate;

  /// Unbiased quantization applied where real data enters a datapath.
  static constexpr RoundingPolicy entry() { return {Rounding::HalfEven, Overflow::Saturate}; }
  /// Truncation used inside butterflies and MAC units.
  static constexpr RoundingPolicy datapath() { return {Rounding::Floor, Overflow::Saturate}; }

  friend bool operator==(const RoundingPolicy&, const RoundingPolicy&) = default;
};

std::string to_string(const RoundingPolicy& policy);

struct Value {
  std::int64_t raw = 0;
  Format format;

  double real() const { return format.to_real(raw); }
};

/// Per-datapath-instance operation tally. Not shared between concurrent
/// datapaths; each inversion owns one.
struct Tally {
  std::uint64_t multiplies = 0;
  std::uint64_t overflows = 0;
};

// ---------------------------------------------------------------------------
// Word-level helpers

/// Shift right by `shift` >= 0 bits under the given rounding mode.
wide_t shift_right(wide_t v, int shift, Rounding mode);

/// Move `v` from `from_frac` to `to_frac` fractional bits. Left shifts are
/// exact; right shifts round. Saturates at the int128 boundary.
wide_t realign(wide_t v, int from_frac, int to_frac, Rounding mode);

/// Bring an exact intermediate back into a `total_bits` word. Out-of-range
/// values saturate or wrap per `overflow` and are counted in `tally` when given.
std::int64_t narrow(wide_t v, int total_bits, Overflow overflow, Tally* tally = nullptr);

/// Number of bits needed to hold `v` as a signed two's-complement word.
int signed_width(wide_t v);

// ---------------------------------------------------------------------------
// Scalar operations

/// Nearest representable value under `policy`. Saturation is defined
/// behaviour; NaN or infinite input throws DomainError.
Value quantize(double x, Format fmt, RoundingPolicy policy = RoundingPolicy::entry());

/// Exact double-width product realigned and rounded to `out_fmt`.
/// Increments `tally.multiplies` by exactly one.
Value fxp_mul(Value a, Value b, Format out_fmt, RoundingPolicy policy, Tally& tally);

/// Exact sum (one extra bit) handled back into the common format.
Value fxp_add(Value a, Value b, RoundingPolicy policy);

/// Exact sum of products a[i]*b[i] (a 2W + log2(n) guard-bit accumulator).
/// Adds a.size() to `tally.multiplies`. Throws DomainError when the operand
/// widths could overflow the 128-bit accumulator.
wide_t dot_exact(std::span<const std::int64_t> a, int a_bits, std::span<const std::int64_t> b,
                 int b_bits, Tally& tally);

// ---------------------------------------------------------------------------
// Block floating point

/// Redundant sign bits of the largest-magnitude element of a block of W-bit
/// words: the left shift every element tolerates without overflow. An
/// all-zero block returns W - 1. A negative result means some element does
/// not fit in W bits at all.
int leading_bit(std::span<const std::int64_t> block, int width);

/// Mantissas of uniform width sharing one exponent: element i is worth
/// mantissas[i] * 2^exponent.
struct BfpBlock {
  std::vector<std::int64_t> mantissas;
  int width = 16;
  int exponent = 0;

  double value(std::size_t i) const;
  std::vector<double> values() const;
};

/// Shift the block so its headroom equals `target_headroom`, adjusting the
/// exponent to preserve values. Right shifts round under `rounding`; the
/// all-zero block is returned unchanged.
BfpBlock normalize_block(const BfpBlock& block, int target_headroom,
                         Rounding rounding = Rounding::Floor);

// ---------------------------------------------------------------------------
// Dense fixed-point operands

using RawMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RawVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

template <class Raw>
struct Fixed {
  Raw raw;
  Format format;

  auto real() const { return (raw.template cast<double>() * format.lsb()).eval(); }
};

using FixedMatrix = Fixed<RawMatrix>;
using FixedVector = Fixed<RawVector>;

template <class Derived>
auto quantize_dense(const Eigen::MatrixBase<Derived>& m, Format fmt,
                    RoundingPolicy policy = RoundingPolicy::entry()) {
  using Raw = std::conditional_t<Derived::ColsAtCompileTime == 1, RawVector, RawMatrix>;
  Fixed<Raw> out{Raw(m.rows(), m.cols()), fmt};
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.raw(i, j) = quantize(m(i, j), fmt, policy).raw;
  return out;
}

}  // namespace fts::fxp
