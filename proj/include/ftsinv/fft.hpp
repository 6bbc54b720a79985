#pragma once

// Memory-based radix-2 Cooley-Tukey FFT with block-floating-point
// normalization, and the DCT-II / DCT-III pair built on it (Makhoul's
// even/odd permutation).
//
// The BFP engine models a single butterfly fed by two memory banks. Input is
// loaded in bit-reversed order and the transform produces natural order, so
// at stage s the butterfly partners are i and i + 2^s. Three normalization
// schemes are emulated:
//
//  * Pre:   before stage T the whole block is shifted to `headroom` redundant
//           sign bits, using the leading bit measured at the end of T-1.
//  * Post:  the butterfly works on the block as stored and its outputs are
//           shifted on write-back by the amount that would have normalized
//           the block entering the stage. Growth of stage T is therefore only
//           corrected at the end of stage T+1, and the stored words must
//           absorb two stages of growth (3 bits for radix-2).
//  * Fixed: classic fixed point, unconditional divide-by-two per stage.

#include "ftsinv/fxp.hpp"
#include "ftsinv/optics.hpp"

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fts::fft {

enum class Normalization { Pre, Post, Fixed };
enum class Precision { Double, Bfp };

const char* to_string(Normalization mode);
Normalization parse_normalization(const std::string& name);

/// Complex fixed-point word pair.
struct CWord {
  std::int64_t re = 0;
  std::int64_t im = 0;

  friend bool operator==(const CWord&, const CWord&) = default;
};

struct FftPlan {
  int n_points = 0;
  int stages = 0;
  Precision precision = Precision::Double;
  int data_bits = 18;
  fxp::Format twiddle_format{18, 16};  // Q2.(T-2) so that 1.0 is exact
  Normalization mode = Normalization::Post;
  int headroom_bits = 3;
  std::vector<CWord> twiddles;  // e^{-2 pi i k / n}, k < n/2

  /// Double-precision reference plan with the same radix-2 structure.
  static FftPlan double_precision(int n_points);
  /// BFP plan. Twiddle width defaults to the data width when <= 0.
  static FftPlan bfp(int n_points, int data_bits, int twiddle_bits = 0,
                     Normalization mode = Normalization::Post, int headroom_bits = 3);

  int twiddle_frac() const { return twiddle_format.frac_bits; }
  /// Initiation interval of the butterfly loop (2 when the pre-butterfly
  /// shift closes a feedback loop, 1 otherwise).
  int initiation_interval() const { return mode == Normalization::Pre ? 2 : 1; }
};

struct BankAddress {
  int bank = 0;
  int address = 0;

  friend bool operator==(const BankAddress&, const BankAddress&) = default;
};

/// Two-bank conflict-free placement: bank is the parity of popcount(index),
/// address is index >> 1. Partners differ in exactly one bit at every stage,
/// so they never share a bank. The address map does not depend on `stage`.
BankAddress bank_map(int logical_index, int stage, int n_points);

/// Partner of `index` at `stage` in the bit-reversed-in, natural-out schedule.
inline int butterfly_partner(int index, int stage) { return index ^ (1 << stage); }

struct FftTelemetry {
  std::vector<int> stage_exponents;  // block exponent after each stage
  std::uint64_t multiplies = 0;
  std::uint64_t butterflies = 0;
  std::uint64_t cycles = 0;
  std::uint64_t overflow_events = 0;
  std::uint64_t bank_conflicts = 0;

  void absorb(const FftTelemetry& other);
};

struct ButterflyOutput {
  CWord upper;  // a + w b
  CWord lower;  // a - w b
};

/// One radix-2 butterfly. The complex product uses four real multiplies at
/// full precision; each output component is truncated once to `data_bits`.
/// Out-of-range results saturate and are counted in `tally.overflows`.
ButterflyOutput butterfly_radix2(CWord a, CWord b, CWord w, int data_bits, int twiddle_frac,
                                 fxp::Tally& tally);

struct BfpFftResult {
  std::vector<CWord> mantissas;  // natural order
  int exponent = 0;              // value = mantissa * 2^exponent
  int gamma_total = 0;           // exponent change applied by the transform
  FftTelemetry telemetry;

  std::vector<std::complex<double>> values() const;
};

/// BFP FFT of natural-order mantissas worth mantissa * 2^input_exponent.
/// Throws DimensionError on a length mismatch and DomainError when the input
/// leaves fewer than plan.headroom_bits redundant sign bits.
BfpFftResult fft_bfp(std::span<const CWord> input, int input_exponent, const FftPlan& plan);

/// Double-precision radix-2 FFT (natural in, natural out).
std::vector<std::complex<double>> fft_double(std::span<const std::complex<double>> input);

/// Unscaled DCT-II: X_k = sum_n x_n cos(pi k (2n+1) / 2N).
Eigen::VectorXd dct2_via_fft(const Eigen::VectorXd& x, const FftPlan& plan,
                             FftTelemetry* telemetry = nullptr);

/// Exact inverse of dct2_via_fft (DCT-III with the 2/N factor and half
/// weight on X_0).
Eigen::VectorXd idct2_via_fft(const Eigen::VectorXd& X, const FftPlan& plan,
                              FftTelemetry* telemetry = nullptr);

/// Direct O(N^2) DCT-II sum.
Eigen::VectorXd dct2_direct(const Eigen::VectorXd& x);

/// Spectrum from a normalized cosine-model interferogram. Under the
/// a(1 + r cos) transmittance the normalized interferogram is half the DCT-II
/// of the spectrum, so the estimate is 2 * DCT-III(y).
/// Requires a regular OPD grid starting at zero with step 1/(2B) and
/// N = M = plan.n_points.
optics::Spectrum reconstruct_fft(const optics::Interferogram& normalized,
                                 const optics::SpectralGrid& grid, const FftPlan& plan,
                                 FftTelemetry* telemetry = nullptr);

}  // namespace fts::fft
