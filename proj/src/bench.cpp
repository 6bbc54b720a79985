#include "ftsinv/bench.hpp"

#include "ftsinv/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace fts::bench {

namespace {

// Shortest round-trip decimal form, so CSV output is byte-stable.
std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
std::string join(const std::vector<T>& v, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_floating_point_v<T>) out += num(v[i]);
    else out += std::to_string(v[i]);
  }
  return out;
}

std::vector<int> to_ints(const std::vector<double>& v, const std::string& what) {
  std::vector<int> out;
  for (double d : v) {
    if (d != std::floor(d)) throw ConfigError(what + ": expected integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

std::vector<optics::GaussianComponent> parse_components(const std::string& text) {
  std::vector<optics::GaussianComponent> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::vector<double> f;
    std::stringstream is(item);
    for (std::string part; std::getline(is, part, '/');) {
      part.erase(0, part.find_first_not_of(' '));
      part.erase(part.find_last_not_of(' ') + 1);
      f.push_back(config::parse_double(part, "components"));
    }
    if (f.size() != 3) throw ConfigError("components: expected center/width/amplitude triples");
    out.push_back({f[0], f[1], f[2]});
  }
  if (out.empty()) throw ConfigError("components: empty");
  return out;
}

std::string components_text(const std::vector<optics::GaussianComponent>& cs) {
  std::string out;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (i) out += ",";
    out += num(cs[i].center) + "/" + num(cs[i].width) + "/" + num(cs[i].amplitude);
  }
  return out;
}

inv::DatapathOptions datapath(const ExperimentConfig& cfg, int bits, int k) {
  inv::DatapathOptions o;
  if (bits > 0) {
    o.format = inv::DatapathFormat::fixed(bits, cfg.frac_bits);
    o.format.quantize_coefficients = !cfg.quantize_y_only;
  }
  o.k = k;
  return o;
}

void fill_resources(SweepRow& row, hw::Method method, int k) {
  const auto r = hw::resource_table(method, k, hw::CalibrationTable::builtin());
  row.dsp = r.dsp;
  row.bram = r.bram;
  row.lut = r.lut;
}

std::pair<std::string, double> single_param(const ExperimentConfig& cfg, hw::Method m) {
  if (m == hw::Method::Tsvd) return {"rank", static_cast<double>(cfg.rank)};
  if (m == hw::Method::Tik) return {"lambda", cfg.lambda};
  return {"", 0.0};
}

}  // namespace

const char* version() { return FTSINV_VERSION; }

double snr_db(const Eigen::VectorXd& reference, const Eigen::VectorXd& estimate) {
  if (reference.size() != estimate.size()) throw DimensionError("snr_db: length mismatch");
  const double signal = reference.norm();
  if (signal == 0) throw DomainError("snr_db: reference is identically zero");
  const double error = (reference - estimate).norm();
  if (error == 0) return kSnrCapDb;
  return std::min(kSnrCapDb, 20.0 * std::log10(signal / error));
}

double snr_db(const optics::Spectrum& reference, const optics::Spectrum& estimate) {
  return snr_db(reference.values, estimate.values);
}

// ---------------------------------------------------------------------------
// Configuration

const std::vector<std::string>& ExperimentConfig::keys() {
  static const std::vector<std::string> k{
      "kind", "n", "m", "bandwidth", "a", "r", "opd_step", "input_snr_db", "seed", "components",
      "center_jitter", "methods", "rank", "lambda", "ranks", "lambdas", "bits", "frac_bits",
      "bit_sweep", "quantize_y_only", "k", "k_sweep", "fft_mode", "twiddle_bits", "headroom"};
  return k;
}

ExperimentConfig ExperimentConfig::from_key_values(const config::KeyValues& kv) {
  kv.require_known(keys());
  ExperimentConfig c;
  const auto kind = kv.get_string("kind", "airy");
  if (kind == "airy") c.kind = optics::Transmittance::Airy;
  else if (kind == "cosine") c.kind = optics::Transmittance::Cosine;
  else throw ConfigError("kind must be airy or cosine");
  c.n = static_cast<int>(kv.get_int("n", c.n));
  c.m = static_cast<int>(kv.get_int("m", c.m));
  c.bandwidth = kv.get_double("bandwidth", c.bandwidth);
  c.params.a = kv.get_double("a", c.params.a);
  c.params.r = kv.get_double("r", c.params.r);
  c.opd_step = kv.get_double("opd_step", c.opd_step);
  c.input_snr_db = kv.get_double("input_snr_db", c.input_snr_db);
  const long long seed = kv.get_int("seed", static_cast<long long>(c.seed));
  if (seed < 0) throw ConfigError("seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  if (kv.contains("components")) c.components = parse_components(kv.at("components"));
  c.center_jitter = kv.get_double("center_jitter", c.center_jitter);
  if (kv.contains("methods")) {
    c.methods.clear();
    std::stringstream ss(kv.at("methods"));
    for (std::string item; std::getline(ss, item, ',');) {
      item.erase(0, item.find_first_not_of(' '));
      item.erase(item.find_last_not_of(' ') + 1);
      c.methods.push_back(hw::parse_method(item));
    }
  }
  c.rank = static_cast<int>(kv.get_int("rank", c.rank));
  c.lambda = kv.get_double("lambda", c.lambda);
  if (kv.contains("ranks")) c.ranks = to_ints(kv.get_list("ranks", {}), "ranks");
  c.lambdas = kv.get_list("lambdas", c.lambdas);
  c.bits = static_cast<int>(kv.get_int("bits", c.bits));
  if (kv.contains("frac_bits")) c.frac_bits = static_cast<int>(kv.get_int("frac_bits", 0));
  if (kv.contains("bit_sweep")) c.bit_sweep = to_ints(kv.get_list("bit_sweep", {}), "bit_sweep");
  c.quantize_y_only = kv.get_bool("quantize_y_only", c.quantize_y_only);
  c.k = static_cast<int>(kv.get_int("k", c.k));
  if (kv.contains("k_sweep")) c.k_sweep = to_ints(kv.get_list("k_sweep", {}), "k_sweep");
  if (kv.contains("fft_mode")) c.fft_mode = fft::parse_normalization(kv.at("fft_mode"));
  c.twiddle_bits = static_cast<int>(kv.get_int("twiddle_bits", c.twiddle_bits));
  c.headroom = static_cast<int>(kv.get_int("headroom", c.headroom));
  c.validate();
  return c;
}

config::KeyValues ExperimentConfig::to_key_values() const {
  config::KeyValues kv;
  kv.set("kind", kind == optics::Transmittance::Airy ? "airy" : "cosine");
  kv.set("n", std::to_string(n));
  kv.set("m", std::to_string(m));
  kv.set("bandwidth", num(bandwidth));
  kv.set("a", num(params.a));
  kv.set("r", num(params.r));
  kv.set("opd_step", num(opd_step));
  kv.set("input_snr_db", num(input_snr_db));
  kv.set("seed", std::to_string(seed));
  kv.set("components", components_text(components));
  kv.set("center_jitter", num(center_jitter));
  std::string ms;
  for (std::size_t i = 0; i < methods.size(); ++i) ms += (i ? "," : "") + std::string(hw::to_string(methods[i]));
  kv.set("methods", ms);
  kv.set("rank", std::to_string(rank));
  kv.set("lambda", num(lambda));
  kv.set("ranks", join(rank_grid()));
  kv.set("lambdas", join(lambdas));
  kv.set("bits", std::to_string(bits));
  if (frac_bits) kv.set("frac_bits", std::to_string(*frac_bits));
  kv.set("bit_sweep", join(bit_sweep));
  kv.set("quantize_y_only", quantize_y_only ? "true" : "false");
  kv.set("k", std::to_string(k));
  kv.set("k_sweep", join(k_sweep));
  kv.set("fft_mode", fft::to_string(fft_mode));
  kv.set("twiddle_bits", std::to_string(twiddle_bits));
  kv.set("headroom", std::to_string(headroom));
  return kv;
}

std::vector<int> ExperimentConfig::rank_grid() const {
  if (!ranks.empty()) return ranks;
  const int r = std::min(n, m);
  std::vector<int> out;
  for (int f : {1, 2, 3, 4, 6, 8, 10, 12, 14, 16}) {
    const int v = std::max(1, r * f / 16);
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  return out;
}

void ExperimentConfig::validate() const {
  optics::SpectralGrid::make(n, bandwidth);
  if (m < 2) throw ConfigError("m must be >= 2");
  params.validate();
  if (!(opd_step > 0)) throw ConfigError("opd_step must be positive");
  if (methods.empty()) throw ConfigError("methods: at least one method is required");
  const int r = std::min(n, m);
  if (rank < 1 || rank > r) throw ConfigError("rank must be in [1, min(n, m)]");
  for (int v : rank_grid())
    if (v < 1 || v > r) throw ConfigError("ranks must be in [1, min(n, m)]");
  if (!(lambda >= 0)) throw ConfigError("lambda must be >= 0");
  for (double l : lambdas)
    if (!(l >= 0)) throw ConfigError("lambdas must be >= 0");
  if (bits != 0 && (bits < 4 || bits > 32)) throw ConfigError("bits must be 0 (double) or in [4, 32]");
  for (int b : bit_sweep)
    if (b < 4 || b > 32) throw ConfigError("bit_sweep entries must be in [4, 32]");
  if (k < 1 || k > 16) throw ConfigError("k must be in [1, 16]");
  for (int v : k_sweep)
    if (v < 1 || v > 16) throw ConfigError("k_sweep entries must be in [1, 16]");
  if (headroom < 1) throw ConfigError("headroom must be >= 1");
}

// ---------------------------------------------------------------------------
// Scenario

Scenario build_scenario(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto grid = optics::SpectralGrid::make(cfg.n, cfg.bandwidth);
  auto truth = optics::gaussian_mixture_spectrum(grid, cfg.components, cfg.seed, cfg.center_jitter);
  auto matrix = optics::build_transfer_matrix(grid, optics::OpdGrid::regular(cfg.m, cfg.opd_step), cfg.kind,
                                              cfg.params);
  auto dct_matrix = optics::build_transfer_matrix(grid, optics::OpdGrid::dct_compatible(grid, cfg.n),
                                                  cfg.kind, cfg.params);

  auto simulate = [&](const optics::TransferMatrix& A, std::uint64_t seed) {
    const Eigen::VectorXd clean = A.A * truth.values;
    const double sigma = std::isfinite(cfg.input_snr_db) ? optics::noise_std_for_snr(clean, cfg.input_snr_db) : 0.0;
    return optics::simulate_interferogram(A, truth, sigma, seed);
  };
  auto measured = simulate(matrix, cfg.seed);
  auto dct_measured = simulate(dct_matrix, cfg.seed + 1);

  auto factors = svd::svd_factorize(matrix.A);
  const double smallest = factors.xi(factors.xi.size() - 1);
  const double cond = smallest > 0 ? factors.xi(0) / smallest : std::numeric_limits<double>::infinity();
  Eigen::MatrixXd pinv = svd::pinv_matrix(factors);
  return {std::move(matrix), std::move(truth), std::move(measured), std::move(factors), std::move(pinv),
          cond, std::move(dct_matrix), std::move(dct_measured)};
}

// ---------------------------------------------------------------------------
// Runs

SweepRow run_method(const Scenario& s, const ExperimentConfig& cfg, hw::Method method,
                    const std::string& param_name, double param_value, int bits, int k,
                    Eigen::VectorXd* estimate) {
  SweepRow row;
  row.method = hw::to_string(method);
  row.param_name = param_name;
  row.param_value = param_value;
  row.bits = bits;
  row.k = method == hw::Method::Fft ? 1 : k;
  fill_resources(row, method, row.k);

  Eigen::VectorXd xhat;
  if (method == hw::Method::Fft) {
    const int n = cfg.n;
    if (cfg.m != n) throw ConfigError("fft method needs n == m");
    const auto plan = bits == 0 ? fft::FftPlan::double_precision(n)
                                : fft::FftPlan::bfp(n, bits, cfg.twiddle_bits, cfg.fft_mode,
                                                    std::min(cfg.headroom, bits - 2));
    const auto normalized =
        optics::normalize_interferogram(s.dct_measured, cfg.params, s.truth.values.sum());
    fft::FftTelemetry tele;
    xhat = fft::reconstruct_fft(normalized, s.truth.grid, plan, &tele).values;
    const auto cost = hw::fft_cost(n, cfg.fft_mode, hw::CalibrationTable::builtin());
    row.latency_cycles = cost.latency_cycles;
    row.time_us = cost.time_us;
    row.multiplies = bits == 0 ? hw::fft_ops(n) + 4 * static_cast<std::uint64_t>(n) : tele.multiplies;
    row.overflows = tele.overflow_events;
  } else {
    const auto opts = datapath(cfg, bits, k);
    inv::InversionResult r;
    if (method == hw::Method::Pinv) {
      r = inv::reconstruct_pinv(s.pinv, s.measured, s.truth.grid, opts);
    } else {
      const svd::Scheme scheme = method == hw::Method::Tsvd
                                     ? svd::Scheme{svd::Tsvd{static_cast<int>(param_value)}}
                                     : svd::Scheme{svd::Tikhonov{param_value * s.factors.xi(0)}};
      r = inv::reconstruct_svd(s.factors, svd::penalize(s.factors.xi, scheme), s.measured, s.truth.grid, opts);
    }
    xhat = std::move(r.estimate.values);
    row.latency_cycles = r.telemetry.latency_cycles;
    row.time_us = r.telemetry.time_us;
    row.multiplies = r.telemetry.multiplies;
    row.overflows = r.telemetry.overflows;
  }
  row.snr_db = snr_db(s.truth.values, xhat);
  if (estimate) *estimate = std::move(xhat);
  return row;
}

SweepResult sweep_precision(const Scenario& s, const ExperimentConfig& cfg) {
  SweepResult out{"sweep-precision", {}};
  std::vector<int> widths{0};
  widths.insert(widths.end(), cfg.bit_sweep.begin(), cfg.bit_sweep.end());
  for (hw::Method m : cfg.methods) {
    std::vector<std::pair<std::string, double>> params;
    if (m == hw::Method::Tsvd)
      for (int r : cfg.rank_grid()) params.push_back({"rank", static_cast<double>(r)});
    else if (m == hw::Method::Tik)
      for (double l : cfg.lambdas) params.push_back({"lambda", l});
    else
      params.push_back({"", 0.0});
    for (const auto& [name, value] : params)
      for (int bits : widths) out.rows.push_back(run_method(s, cfg, m, name, value, bits, cfg.k));
  }
  return out;
}

SweepResult sweep_precision(const ExperimentConfig& cfg) { return sweep_precision(build_scenario(cfg), cfg); }

SweepResult sweep_parallelism(const Scenario& s, const ExperimentConfig& cfg) {
  SweepResult out{"sweep-parallel", {}};
  for (hw::Method m : cfg.methods) {
    if (m == hw::Method::Fft) continue;
    const auto [name, value] = single_param(cfg, m);
    Eigen::VectorXd reference;
    run_method(s, cfg, m, name, value, cfg.bits, 1, &reference);
    for (int k : cfg.k_sweep) {
      Eigen::VectorXd est;
      auto row = run_method(s, cfg, m, name, value, cfg.bits, k, &est);
      row.matches_k1 = (est.array() == reference.array()).all();
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

SweepResult sweep_parallelism(const ExperimentConfig& cfg) {
  return sweep_parallelism(build_scenario(cfg), cfg);
}

SweepResult run_comparison(const Scenario& s, const ExperimentConfig& cfg) {
  SweepResult out{"compare", {}};
  for (hw::Method m : cfg.methods) {
    const auto [name, value] = single_param(cfg, m);
    out.rows.push_back(run_method(s, cfg, m, name, value, cfg.bits, cfg.k));
  }
  return out;
}

SweepResult run_comparison(const ExperimentConfig& cfg) { return run_comparison(build_scenario(cfg), cfg); }

// ---------------------------------------------------------------------------
// CSV

namespace {

void write_metadata(std::ostream& out, const std::string& study) {
  out << "# tool=ftsinv\n"
      << "# version=" << version() << "\n"
      << "# study=" << study << "\n"
      << "# snr_definition=20*log10(norm2(x)/norm2(x-x_hat)) dB, capped at " << num(kSnrCapDb) << "\n"
      << "# entry_rounding=" << fxp::to_string(fxp::RoundingPolicy::entry()) << "\n"
      << "# datapath_rounding=" << fxp::to_string(fxp::RoundingPolicy::datapath()) << "\n";
}

}  // namespace

void write_csv(std::ostream& out, const SweepResult& result, const ExperimentConfig& cfg) {
  write_metadata(out, result.study);
  const auto echo = cfg.to_key_values();
  for (const auto& [k, v] : echo.entries()) out << "# config." << k << "=" << v << "\n";
  out << "method,param,param_value,bits,k,snr_db,latency_cycles,time_us,multiplies,overflows,dsp,bram,lut,"
         "matches_k1\n";
  for (const auto& r : result.rows) {
    out << r.method << ',' << r.param_name << ',' << (r.param_name.empty() ? "" : num(r.param_value)) << ','
        << r.bits << ',' << r.k << ',' << num(r.snr_db) << ',' << r.latency_cycles << ',' << num(r.time_us)
        << ',' << r.multiplies << ',' << r.overflows << ',' << r.dsp << ',' << r.bram << ',' << r.lut << ','
        << (r.matches_k1 ? (*r.matches_k1 ? "true" : "false") : "") << '\n';
  }
}

void write_costs_csv(std::ostream& out, const hw::Comparison& cmp, const hw::ComparisonSetup& setup,
                     const hw::CalibrationTable& calib) {
  write_metadata(out, "costs");
  const auto pf = hw::pinv_fit(calib);
  const auto sf = hw::svd_fit(calib);
  out << "# setup.n=" << setup.n << "\n# setup.m=" << setup.m << "\n# setup.rank=" << setup.rank
      << "\n# setup.fft_points=" << setup.fft_points << "\n# setup.fft_mode=" << fft::to_string(setup.fft_mode)
      << "\n# fit.pinv.alpha=" << num(pf.alpha) << "\n# fit.pinv.overhead=" << pf.overhead
      << "\n# fit.pinv.max_residual=" << num(pf.max_abs_residual) << "\n# fit.svd.alpha=" << num(sf.alpha)
      << "\n# fit.svd.overhead=" << sf.overhead << "\n# fit.svd.max_residual=" << num(sf.max_abs_residual)
      << "\n# tik_pinv_op_ratio=" << num(cmp.tik_pinv_op_ratio)
      << "\n# tik_pinv_cycle_ratio=" << num(cmp.tik_pinv_cycle_ratio) << "\n";
  out << "method,k,latency_cycles,fmax_mhz,time_us,dsp,bram,lut,ratio_to_fft,headline_ratio,flagged\n";
  for (const auto& r : cmp.rows) {
    out << hw::to_string(r.method) << ',' << r.k << ',' << r.cost.latency_cycles << ',' << num(r.cost.fmax_mhz)
        << ',' << num(r.cost.time_us) << ',' << r.cost.dsp << ',' << r.cost.bram << ',' << r.cost.lut << ','
        << num(r.time_ratio_to_fft) << ',' << (r.headline_ratio ? num(*r.headline_ratio) : "") << ','
        << (r.flagged ? "true" : "false") << '\n';
  }
}

}  // namespace fts::bench
