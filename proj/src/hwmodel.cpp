#include "ftsinv/hwmodel.hpp"

#include "ftsinv/config.hpp"
#include "ftsinv/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace fts::hw {

namespace {

void check_k(int k) {
  if (k < 1) throw DomainError("parallelism factor K must be >= 1");
}

int lerp_k(int at_k1, int at_k6, int k) {
  return static_cast<int>(std::lround(at_k1 + (at_k6 - at_k1) * (k - 1) / 5.0));
}

double table_fmax(const std::vector<double>& table, int k) {
  if (table.empty()) throw DomainError("calibration: empty fmax table");
  return table[std::min<std::size_t>(k - 1, table.size() - 1)];
}

HwCost finish(Resources r, std::uint64_t cycles, double fmax) {
  return {r.dsp, r.bram, r.lut, cycles, fmax, static_cast<double>(cycles) / fmax};
}

std::vector<LatencyAnchor> read_anchors(const config::KeyValues& kv, const std::string& prefix,
                                        std::vector<LatencyAnchor> fallback) {
  std::vector<LatencyAnchor> out;
  for (int k = 1; k <= 16; ++k) {
    const std::string key = prefix + ".k" + std::to_string(k);
    if (kv.contains(key)) out.push_back({k, config::parse_double(kv.at(key), key)});
  }
  return out.empty() ? fallback : out;
}

std::vector<double> read_fmax(const config::KeyValues& kv, const std::string& prefix,
                              std::vector<double> fallback) {
  std::vector<double> out;
  for (int k = 1; kv.contains(prefix + ".k" + std::to_string(k)); ++k)
    out.push_back(config::parse_double(kv.at(prefix + ".k" + std::to_string(k)), prefix));
  return out.empty() ? fallback : out;
}

Resources read_resources(const config::KeyValues& kv, const std::string& key, Resources fallback) {
  if (!kv.contains(key)) return fallback;
  const auto v = config::parse_list(kv.at(key), key);
  if (v.size() != 3) throw ConfigError(key + ": expected dsp, bram, lut");
  return {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::Fft: return "fft";
    case Method::Pinv: return "pinv";
    case Method::Tsvd: return "tsvd";
    case Method::Tik: return "tik";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "fft") return Method::Fft;
  if (name == "pinv") return Method::Pinv;
  if (name == "tsvd") return Method::Tsvd;
  if (name == "tik") return Method::Tik;
  throw ConfigError("unknown method: " + name);
}

CalibrationTable CalibrationTable::builtin() {
  CalibrationTable t;
  t.pinv_latency = {{1, 53965}, {2, 27559}, {3, 18529}, {4, 14014}, {5, 11434}, {6, 9499}};
  t.svd_latency = {{1, 154673}, {2, 77918}, {3, 52118}, {4, 39218}, {5, 31693}, {6, 26318}};
  t.pinv_fmax = {149.41, 149.2, 147.7, 147.77, 147.7, 147.776};
  t.svd_fmax = {145.2, 166.47, 177.58, 167.89, 172.53, 185.49};
  return t;
}

CalibrationTable CalibrationTable::load(const std::filesystem::path& path) {
  const auto kv = config::load_key_values(path);
  CalibrationTable t = builtin();
  t.pinv_latency = read_anchors(kv, "pinv.latency", t.pinv_latency);
  t.svd_latency = read_anchors(kv, "svd.latency", t.svd_latency);
  t.pinv_fmax = read_fmax(kv, "pinv.fmax", t.pinv_fmax);
  t.svd_fmax = read_fmax(kv, "svd.fmax", t.svd_fmax);
  t.reference_n = static_cast<int>(kv.get_int("reference.n", t.reference_n));
  t.reference_m = static_cast<int>(kv.get_int("reference.m", t.reference_m));
  t.fft_anchor_points = static_cast<int>(kv.get_int("fft.anchor_points", t.fft_anchor_points));
  t.fft_anchor_cycles = kv.get_double("fft.latency", t.fft_anchor_cycles);
  t.fft_fmax = kv.get_double("fft.fmax", t.fft_fmax);
  t.fft_resources = read_resources(kv, "resources.fft", t.fft_resources);
  t.pinv_k1 = read_resources(kv, "resources.pinv.k1", t.pinv_k1);
  t.pinv_k6 = read_resources(kv, "resources.pinv.k6", t.pinv_k6);
  t.svd_k1 = read_resources(kv, "resources.svd.k1", t.svd_k1);
  t.svd_k6 = read_resources(kv, "resources.svd.k6", t.svd_k6);
  return t;
}

std::uint64_t LatencyFit::cycles(double ops, int k) const {
  check_k(k);
  const double work = std::ceil(alpha * ops / k);
  return static_cast<std::uint64_t>(std::max(0.0, work + static_cast<double>(overhead)));
}

LatencyFit fit_latency(const std::vector<LatencyAnchor>& anchors, double reference_ops) {
  auto first = std::find_if(anchors.begin(), anchors.end(), [](const auto& a) { return a.k == 1; });
  if (first == anchors.end()) throw DomainError("latency fit needs a K = 1 anchor");
  if (!(reference_ops > 0)) throw DomainError("latency fit needs a positive op count");
  const double a1 = first->cycles;

  // cycles(K) - a1 = L (1/K - 1); least squares for L.
  double num = 0, den = 0;
  for (const auto& a : anchors) {
    const double u = 1.0 / a.k - 1.0;
    num += u * (a.cycles - a1);
    den += u * u;
  }
  LatencyFit fit;
  fit.base_cycles = den > 0 ? num / den : a1;
  fit.alpha = fit.base_cycles / reference_ops;
  fit.overhead = static_cast<long long>(a1 - std::ceil(fit.alpha * reference_ops));
  for (const auto& a : anchors) {
    const double r = (static_cast<double>(fit.cycles(reference_ops, a.k)) - a.cycles) / a.cycles;
    fit.relative_residuals.push_back(r);
    fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(r));
  }
  return fit;
}

LatencyFit pinv_fit(const CalibrationTable& calib) {
  return fit_latency(calib.pinv_latency, static_cast<double>(pinv_ops(calib.reference_n, calib.reference_m)));
}

LatencyFit svd_fit(const CalibrationTable& calib) {
  const int r = std::min(calib.reference_n, calib.reference_m);
  return fit_latency(calib.svd_latency,
                     static_cast<double>(svd_ops(calib.reference_n, calib.reference_m, r)));
}

std::uint64_t pinv_ops(int n, int m) {
  if (n < 1 || m < 1) throw DomainError("op count: N and M must be >= 1");
  return static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(m);
}

std::uint64_t svd_ops(int n, int m, int rank) {
  if (n < 1 || m < 1 || rank < 0) throw DomainError("op count: bad shape or rank");
  return static_cast<std::uint64_t>(rank) * (2 * static_cast<std::uint64_t>(n) + m);
}

std::uint64_t fft_butterfly_slots(int n_points) {
  if (n_points < 2 || !std::has_single_bit(static_cast<unsigned>(n_points)))
    throw DomainError("FFT size must be a power of two >= 2");
  return static_cast<std::uint64_t>(n_points / 2) * std::countr_zero(static_cast<unsigned>(n_points));
}

Resources resource_table(Method method, int k, const CalibrationTable& calib) {
  check_k(k);
  switch (method) {
    case Method::Fft: return calib.fft_resources;
    case Method::Pinv:
      return {k * calib.pinv_k1.dsp, lerp_k(calib.pinv_k1.bram, calib.pinv_k6.bram, k),
              lerp_k(calib.pinv_k1.lut, calib.pinv_k6.lut, k)};
    case Method::Tsvd:
    case Method::Tik:
      return {k * calib.svd_k1.dsp, lerp_k(calib.svd_k1.bram, calib.svd_k6.bram, k),
              lerp_k(calib.svd_k1.lut, calib.svd_k6.lut, k)};
  }
  throw DomainError("resource_table: unknown method");
}

double fmax_for(Method method, int k, const CalibrationTable& calib) {
  check_k(k);
  switch (method) {
    case Method::Fft: return calib.fft_fmax;
    case Method::Pinv: return table_fmax(calib.pinv_fmax, k);
    case Method::Tsvd:
    case Method::Tik: return table_fmax(calib.svd_fmax, k);
  }
  throw DomainError("fmax_for: unknown method");
}

HwCost pinv_cost(int n, int m, int k, const CalibrationTable& calib) {
  const auto cycles = pinv_fit(calib).cycles(static_cast<double>(pinv_ops(n, m)), k);
  return finish(resource_table(Method::Pinv, k, calib), cycles, fmax_for(Method::Pinv, k, calib));
}

HwCost svd_cost(Method method, int n, int m, int rank, int k, const CalibrationTable& calib) {
  if (method != Method::Tsvd && method != Method::Tik) throw DomainError("svd_cost: method must be tsvd or tik");
  if (rank < 1) throw DomainError("svd_cost: rank must be >= 1");
  const auto cycles = svd_fit(calib).cycles(static_cast<double>(svd_ops(n, m, rank)), k);
  return finish(resource_table(method, k, calib), cycles, fmax_for(method, k, calib));
}

namespace {

double fft_structural_cycles(int n, int ii) {
  const int stages = std::countr_zero(static_cast<unsigned>(n));
  // Butterfly slots, a 2-cycle drain per stage, and three linear passes for
  // the DCT permutation load, post-twiddle and readout.
  return static_cast<double>(ii) * fft_butterfly_slots(n) + 2.0 * stages + 3.0 * n;
}

}  // namespace

HwCost fft_cost(int n_points, fft::Normalization mode, const CalibrationTable& calib) {
  fft_butterfly_slots(n_points);  // validates the size
  const double c0 = calib.fft_anchor_cycles - fft_structural_cycles(calib.fft_anchor_points, 1);
  const int ii = mode == fft::Normalization::Pre ? 2 : 1;
  const auto cycles = static_cast<std::uint64_t>(std::max(0.0, fft_structural_cycles(n_points, ii) + c0));
  return finish(calib.fft_resources, cycles, calib.fft_fmax);
}

ComparisonSetup ComparisonSetup::anchored(const CalibrationTable& calib) {
  ComparisonSetup s;
  s.n = calib.reference_n;
  s.m = calib.reference_m;
  s.rank = std::min(s.n, s.m);
  s.fft_points = calib.fft_anchor_points;
  return s;
}

Comparison compare_methods(const ComparisonSetup& setup, const CalibrationTable& calib) {
  Comparison out;
  const HwCost fft = fft_cost(setup.fft_points, setup.fft_mode, calib);
  out.rows.push_back({Method::Fft, 1, fft, 1.0, std::nullopt, false});

  auto headline = [](Method m, int k) -> std::optional<double> {
    if (m == Method::Pinv && k == 1) return 8.0;
    if (m == Method::Tik && k == 1) return 24.0;
    if (m == Method::Pinv && k == 6) return 1.5;
    if (m == Method::Tik && k == 6) return 3.2;
    return std::nullopt;
  };

  for (int k : setup.ks) {
    for (Method m : {Method::Pinv, Method::Tsvd, Method::Tik}) {
      HwCost c = m == Method::Pinv ? pinv_cost(setup.n, setup.m, k, calib)
                                   : svd_cost(m, setup.n, setup.m, setup.rank, k, calib);
      ComparisonRow row{m, k, c, c.time_us / fft.time_us, headline(m, k), false};
      if (row.headline_ratio)
        row.flagged = std::abs(row.time_ratio_to_fft / *row.headline_ratio - 1.0) > kHeadlineTolerance;
      out.rows.push_back(row);
    }
  }
  out.tik_pinv_op_ratio = static_cast<double>(svd_ops(setup.n, setup.m, setup.rank)) /
                          static_cast<double>(pinv_ops(setup.n, setup.m));
  out.tik_pinv_cycle_ratio =
      static_cast<double>(svd_cost(Method::Tik, setup.n, setup.m, setup.rank, 1, calib).latency_cycles) /
      static_cast<double>(pinv_cost(setup.n, setup.m, 1, calib).latency_cycles);
  return out;
}

}  // namespace fts::hw
