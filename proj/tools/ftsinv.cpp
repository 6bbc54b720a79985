// Command-line front end: simulate, invert, sweeps, comparison and costs.

#include "ftsinv/bench.hpp"
#include "ftsinv/error.hpp"
#include "ftsinv/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

using namespace fts;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string flag_for(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

struct Common {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::string method;
  std::string parallel_k;
  std::string fft_points;
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value experiment config file");
    for (const auto& key : bench::ExperimentConfig::keys())
      app->add_option(flag_for(key), overrides[key], "override config key '" + key + "'");
    app->add_option("--method", method, "single method: fft, pinv, tsvd or tik");
    app->add_option("--parallel-k", parallel_k, "parallel memories K (alias of --k)");
    app->add_option("--fft-points", fft_points, "transform size; sets n and m");
    app->add_option("--out", out, "output file (stdout when omitted)");
  }

  bench::ExperimentConfig resolve() const {
    config::KeyValues kv = config_path.empty() ? config::KeyValues{} : config::load_key_values(config_path);
    for (const auto& [k, v] : overrides)
      if (!v.empty()) kv.set(k, v);
    if (!method.empty()) kv.set("methods", method);
    if (!parallel_k.empty()) kv.set("k", parallel_k);
    if (!fft_points.empty()) {
      kv.set("n", fft_points);
      kv.set("m", fft_points);
    }
    auto cfg = bench::ExperimentConfig::from_key_values(kv);
    if (std::isfinite(cfg.input_snr_db) && !kv.contains("seed"))
      throw ConfigError("--seed (or a seed key in the config) is required for noisy runs");
    return cfg;
  }

  template <class F>
  void emit(F&& write) const {
    if (out.empty()) {
      write(std::cout);
      return;
    }
    std::ofstream f(out);
    if (!f) throw ConfigError("cannot write " + out);
    write(f);
  }
};

void print_row(std::ostream& os, const bench::SweepRow& r) {
  os << "method=" << r.method << "\n";
  if (!r.param_name.empty()) os << r.param_name << "=" << r.param_value << "\n";
  os << "bits=" << r.bits << "\nk=" << r.k << "\nsnr_db=" << r.snr_db << "\nmultiplies=" << r.multiplies
     << "\noverflows=" << r.overflows << "\nlatency_cycles=" << r.latency_cycles << "\ntime_us=" << r.time_us
     << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrum reconstruction for Fourier-transform spectrometers"};
  app.require_subcommand(1);

  Common simulate_opts, invert_opts, precision_opts, parallel_opts, compare_opts;
  std::string spectrum_out, matrix_out;
  auto* simulate = app.add_subcommand("simulate", "forward model -> interferogram CSV");
  simulate_opts.attach(simulate);
  simulate->add_option("--spectrum-out", spectrum_out, "write the true spectrum CSV");
  simulate->add_option("--matrix-out", matrix_out, "write the transfer matrix (.csv or binary)");

  std::string spectrum_file;
  auto* invert = app.add_subcommand("invert", "one reconstruction of the configured scenario");
  invert_opts.attach(invert);
  invert->add_option("--spectrum-file", spectrum_file, "write the estimated spectrum CSV");

  auto* sweep_precision = app.add_subcommand("sweep-precision", "SNR versus datapath width");
  precision_opts.attach(sweep_precision);
  auto* sweep_parallel = app.add_subcommand("sweep-parallel", "latency and bit-identity versus K");
  parallel_opts.attach(sweep_parallel);
  auto* compare = app.add_subcommand("compare", "one row per method");
  compare_opts.attach(compare);

  std::string calibration_path, costs_out;
  int cost_n = 0, cost_m = 0, cost_rank = 0, cost_fft_points = 0;
  std::string cost_ks, cost_fft_mode = "post";
  auto* costs = app.add_subcommand("costs", "hardware cost comparison table");
  costs->add_option("--calibration", calibration_path, "calibration key = value file");
  costs->add_option("--n", cost_n, "spectral bins (default: calibration reference)");
  costs->add_option("--m", cost_m, "interferogram samples (default: calibration reference)");
  costs->add_option("--rank", cost_rank, "TSVD/TIK rank (default: min(n, m))");
  costs->add_option("--k-sweep", cost_ks, "comma-separated K values (default 1,6)");
  costs->add_option("--fft-points", cost_fft_points, "FFT size (default: calibration anchor)");
  costs->add_option("--fft-mode", cost_fft_mode, "pre, post or fixed");
  costs->add_option("--out", costs_out, "output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) {
      const auto cfg = simulate_opts.resolve();
      const auto s = bench::build_scenario(cfg);
      simulate_opts.emit([&](std::ostream& os) { io::write_interferogram_csv(os, s.measured); });
      if (!spectrum_out.empty()) io::save_spectrum(spectrum_out, s.truth);
      if (!matrix_out.empty()) io::save_matrix(matrix_out, s.matrix.A);
      std::cerr << "condition_number=" << s.condition_number << "\n";
    } else if (*invert) {
      const auto cfg = invert_opts.resolve();
      if (cfg.methods.size() != 1) throw ConfigError("invert needs exactly one --method");
      const auto s = bench::build_scenario(cfg);
      const hw::Method m = cfg.methods.front();
      const std::string name = m == hw::Method::Tsvd ? "rank" : m == hw::Method::Tik ? "lambda" : "";
      const double value = m == hw::Method::Tsvd ? cfg.rank : cfg.lambda;
      Eigen::VectorXd estimate;
      const auto row = bench::run_method(s, cfg, m, name, value, cfg.bits, cfg.k, &estimate);
      invert_opts.emit([&](std::ostream& os) { print_row(os, row); });
      if (!spectrum_file.empty()) io::save_spectrum(spectrum_file, {estimate, s.truth.grid});
      if (m == hw::Method::Fft && row.overflows > 0 && cfg.fft_mode == fft::Normalization::Post &&
          cfg.headroom >= 3)
        throw NumericalFailure("BFP overflow despite 3 headroom bits");
    } else if (*sweep_precision) {
      const auto cfg = precision_opts.resolve();
      const auto res = bench::sweep_precision(cfg);
      precision_opts.emit([&](std::ostream& os) { bench::write_csv(os, res, cfg); });
    } else if (*sweep_parallel) {
      const auto cfg = parallel_opts.resolve();
      const auto res = bench::sweep_parallelism(cfg);
      parallel_opts.emit([&](std::ostream& os) { bench::write_csv(os, res, cfg); });
    } else if (*compare) {
      const auto cfg = compare_opts.resolve();
      const auto res = bench::run_comparison(cfg);
      compare_opts.emit([&](std::ostream& os) { bench::write_csv(os, res, cfg); });
    } else if (*costs) {
      const auto calib = calibration_path.empty() ? hw::CalibrationTable::builtin()
                                                  : hw::CalibrationTable::load(calibration_path);
      auto setup = hw::ComparisonSetup::anchored(calib);
      if (cost_n) setup.n = cost_n;
      if (cost_m) setup.m = cost_m;
      setup.rank = cost_rank ? cost_rank : std::min(setup.n, setup.m);
      if (cost_fft_points) setup.fft_points = cost_fft_points;
      setup.fft_mode = fft::parse_normalization(cost_fft_mode);
      if (!cost_ks.empty()) {
        setup.ks.clear();
        for (double k : config::parse_list(cost_ks, "--k-sweep")) setup.ks.push_back(static_cast<int>(k));
      }
      const auto cmp = hw::compare_methods(setup, calib);
      auto write = [&](std::ostream& os) { bench::write_costs_csv(os, cmp, setup, calib); };
      if (costs_out.empty()) write(std::cout);
      else {
        std::ofstream f(costs_out);
        if (!f) throw ConfigError("cannot write " + costs_out);
        write(f);
      }
    }
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
