// quadtangle: run single simulations, parameter sweeps, and emit gnuplot
// scripts for the resulting CSV files.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 numeric failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "quadtangle/analysis.hpp"
#include "quadtangle/config.hpp"
#include "quadtangle/convergence.hpp"

namespace fs = std::filesystem;
using namespace quadtangle;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-point notation carrying 9 significant digits.
std::string fixed9(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(v))));
  const int decimals = std::max(0, 8 - exponent);
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& doc) { open_out(path) << doc.dump(2) << '\n'; }

struct Overrides {
  std::optional<double> dt;
  std::optional<double> t_end;
};

RunConfig load_with_overrides(const std::string& path, const Overrides& o) {
  RunConfig cfg = load_config(path);
  if (o.dt) cfg.integrator.dt = *o.dt;
  if (o.t_end) cfg.integrator.t_end = *o.t_end;
  try {
    cfg.integrator.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("command line: ") + e.what());
  }
  return cfg;
}

void print_warnings(const SystemParams& p) {
  for (const auto& w : validate(p)) std::cerr << "warning: " << w << '\n';
}

json period_json(const PeriodEstimate& e) {
  auto us = [](const std::vector<double>& ts) {
    std::vector<double> out;
    for (double t : ts) out.push_back(t * 1e6);
    return out;
  };
  return {{"tau_us", e.tau * 1e6},
          {"reliable", e.reliable},
          {"spread", e.spread},
          {"fundamental_us", e.fundamental * 1e6},
          {"peak_to_peak_tau_us", number_or_null(e.peak_to_peak_tau * 1e6)},
          {"minima_us", us(e.minima_times)},
          {"maxima_us", us(e.maxima_times)}};
}

int cmd_run(const std::string& config_path, const fs::path& out_dir, const Overrides& o) {
  const RunConfig cfg = load_with_overrides(config_path, o);
  const SystemParams p = cfg.system.angular();
  print_warnings(p);

  const DressedBasis basis = diagonalize(build_closed_hamiltonian(p));
  const GammaMatrix gamma = gamma_matrix(basis);
  const Trajectory traj = evolve(basis, gamma, p, cfg.initial_state, cfg.integrator);
  const TangleSeries series = tangle_series(traj);

  json meta;
  meta["config"] = to_json(cfg);
  meta["dt"] = cfg.integrator.dt;
  meta["samples"] = series.size();
  meta["convergence_deviation"] =
      cfg.integrator.convergence_check ? json(convergence_probe(basis, gamma, p, cfg.initial_state, cfg.integrator))
                                       : json(nullptr);
  meta["peak_tangle"] = series.max();
  meta["min_tangle"] = series.min();
  try {
    const PeriodEstimate est = extract_period(series, cfg.analysis);
    meta["rise_time_us"] = est.rise_time * 1e6;
    meta["period"] = period_json(est);
  } catch (const NoPeriodicityError& e) {
    meta["rise_time_us"] = rise_time(series) * 1e6;
    meta["period"] = nullptr;
    meta["period_error"] = e.what();
  }

  fs::create_directories(out_dir);
  for (const auto& sel : cfg.outputs) {
    if (sel == "series") {
      auto out = open_out(out_dir / "series.csv");
      out << "time_us,tangle\n";
      for (std::size_t i = 0; i < series.size(); ++i)
        out << fixed9(series.times[i] * 1e6) << ',' << fixed9(clamp_for_report(series.values[i])) << '\n';
    } else if (sel == "trajectory") {
      auto out = open_out(out_dir / "trajectory.csv");
      out << "time_us";
      for (int i = 0; i < kDim; ++i) {
        const BareIndex b = bare_index(i);
        out << ",re_m" << b.m << "_n" << b.n << ",im_m" << b.m << "_n" << b.n;
      }
      out << '\n';
      for (std::size_t s = 0; s < traj.size(); ++s) {
        out << fixed9(traj.times[s] * 1e6);
        for (int i = 0; i < kDim; ++i) out << ',' << fixed9(traj.beta[s](i).real()) << ',' << fixed9(traj.beta[s](i).imag());
        out << '\n';
      }
    } else if (sel == "spectrum") {
      auto out = open_out(out_dir / "spectrum.csv");
      out << "k,frequency_hz,excitations\n";
      for (int k = 0; k < kDim; ++k)
        out << k << ',' << fixed9(basis.energies(k) / kTwoPi) << ',' << basis.excitation[std::size_t(k)] << '\n';
    }
  }
  write_json(out_dir / "run.json", meta);
  std::cerr << "wrote " << out_dir.string() << " (peak tangle " << series.max() << ")\n";
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const fs::path& out_dir, const Overrides& o, unsigned workers) {
  const RunConfig cfg = load_with_overrides(config_path, o);
  if (!cfg.sweep) throw ConfigError("config.sweep: required for the sweep command");
  const SweepGrid grid = cfg.grid();
  print_warnings(cfg.system.angular());

  const SweepResult result = run_sweep(grid, workers, [](std::size_t done, std::size_t total, const SweepRecord& r) {
    std::cerr << '[' << done << '/' << total << "] lambda=" << r.lambda << " eta_L/2pi=" << r.eta_L / kTwoPi / 1e6
              << " MHz" << (r.failed() ? " failed: " + r.error : "") << '\n';
  });
  const Histogram hist = bin_histogram(result, cfg.sweep->bin_width);

  fs::create_directories(out_dir);
  {
    auto out = open_out(out_dir / "sweep.csv");
    out << "lambda,eta_L_MHz,period_us,peak_tangle,reliable\n";
    for (const auto& r : result.records)
      out << fixed9(r.lambda) << ',' << fixed9(r.eta_L / kTwoPi / 1e6) << ',' << fixed9(r.tau * 1e6) << ','
          << fixed9(r.peak_value) << ',' << (r.reliable ? 1 : 0) << '\n';
  }
  {
    auto out = open_out(out_dir / "histogram.csv");
    out << "lambda_bin_lo,summed_period_us,count\n";
    for (std::size_t k = 0; k < hist.summed_tau.size(); ++k)
      out << fixed9(hist.bin_lo(k)) << ',' << fixed9(hist.summed_tau[k] * 1e6) << ',' << hist.counts[k] << '\n';
  }
  {
    auto out = open_out(out_dir / "contour.csv");
    out << "lambda,eta_L_MHz,log10_period_us\n";
    for (const auto& r : result.records) {
      const double v = (!r.failed() && r.reliable) ? std::log10(r.tau * 1e6) : std::nan("");
      out << fixed9(r.lambda) << ',' << fixed9(r.eta_L / kTwoPi / 1e6) << ',' << fixed9(v) << '\n';
    }
  }
  json errors = json::array();
  for (const auto& r : result.records)
    if (r.failed()) errors.push_back({{"lambda", r.lambda}, {"eta_L_MHz", r.eta_L / kTwoPi / 1e6}, {"error", r.error}});
  write_json(out_dir / "sweep_errors.json", errors);

  json meta;
  meta["config"] = to_json(cfg);
  meta["points"] = result.records.size();
  meta["failed"] = errors.size();
  meta["excluded_from_histogram"] = hist.excluded;
  meta["histogram_argmax_lambda"] = hist.summed_tau.empty() ? json(nullptr) : json(hist.bin_lo(hist.argmax()));
  double best_tau = -1.0;
  const SweepRecord* best = nullptr;
  for (const auto& r : result.records)
    if (!r.failed() && r.reliable && r.tau > best_tau) best_tau = r.tau, best = &r;
  if (best) {
    meta["longest_period"] = {{"lambda", best->lambda}, {"eta_L_MHz", best->eta_L / kTwoPi / 1e6}, {"tau_us", best->tau * 1e6}};
  }
  write_json(out_dir / "sweep.json", meta);
  std::cerr << "wrote " << out_dir.string() << " (" << errors.size() << " failed, " << hist.excluded
            << " excluded from histogram)\n";
  return kExitOk;
}

void write_script(const fs::path& path, const std::string& text) { open_out(path) << text; }

int cmd_report(const fs::path& dir) {
  auto has = [&](const char* f) { return fs::is_regular_file(dir / f); };
  std::vector<std::string> written;
  if (has("series.csv")) {
    write_script(dir / "series.gp",
                 "set datafile separator ','\n"
                 "set terminal pngcairo size 900,500\n"
                 "set output 'series.png'\n"
                 "set xlabel 'time (us)'\n"
                 "set ylabel '4-tangle'\n"
                 "plot 'series.csv' using 1:2 every ::1 with lines title 'tangle'\n");
    written.push_back("series.gp");
  }
  if (has("sweep.csv")) {
    write_script(dir / "sweep_scatter.gp",
                 "set datafile separator ','\n"
                 "set terminal pngcairo size 900,500\n"
                 "set output 'sweep_scatter.png'\n"
                 "set xlabel 'lambda'\n"
                 "set ylabel 'period (us)'\n"
                 "plot 'sweep.csv' using 1:($5 > 0 ? $3 : NaN) every ::1 with points pt 7 ps 0.5 title 'reliable'\n");
    written.push_back("sweep_scatter.gp");
  }
  if (has("histogram.csv")) {
    write_script(dir / "histogram.gp",
                 "set datafile separator ','\n"
                 "set terminal pngcairo size 900,500\n"
                 "set output 'histogram.png'\n"
                 "set xlabel 'lambda'\n"
                 "set ylabel 'summed period (us)'\n"
                 "set style fill solid 0.6\n"
                 "set boxwidth 0.025 absolute\n"
                 "plot 'histogram.csv' using ($1 + 0.0125):2 every ::1 with boxes title 'summed period'\n");
    written.push_back("histogram.gp");
  }
  if (has("contour.csv")) {
    write_script(dir / "contour.gp",
                 "set datafile separator ','\n"
                 "set terminal pngcairo size 900,600\n"
                 "set output 'contour.png'\n"
                 "set xlabel 'eta_L/2pi (MHz)'\n"
                 "set ylabel 'lambda'\n"
                 "set cblabel 'log10 period (us)'\n"
                 "set view map\n"
                 "set datafile missing 'nan'\n"
                 "plot 'contour.csv' using 2:1:3 every ::1 with points pt 5 ps 1 palette notitle\n");
    written.push_back("contour.gp");
  }
  if (written.empty()) {
    std::cerr << "error: no plottable outputs in '" << dir.string() << "'\n"
              << "expected one of: series.csv (from run), sweep.csv, histogram.csv, contour.csv (from sweep)\n";
    return kExitConfig;
  }
  for (const auto& w : written) std::cout << (dir / w).string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Four-tangle dynamics of three qubits in a driven cavity"};
  app.require_subcommand(1);

  bool seedless = false;
  app.add_flag("--seedless", seedless, "Reserved; the simulator has no randomness");

  std::string config_path;
  std::string out_dir = "out";
  unsigned workers = 0;
  Overrides overrides;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Configuration file (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--dt", overrides.dt, "Override the integrator step (s)");
    sub->add_option("--t-end", overrides.t_end, "Override the simulated duration (s)");
  };
  CLI::App* run = app.add_subcommand("run", "Simulate one configuration");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep lambda and eta_L over the configured grid");
  add_common(sweep);
  sweep->add_option("--workers", workers, "Worker threads (0 = number of processors)")->capture_default_str();
  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "Write gnuplot scripts for a run or sweep directory");
  report->add_option("dir", report_dir, "Output directory of run or sweep")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (seedless) {
    std::cerr << "error: --seedless is reserved: the simulator is deterministic and uses no random numbers\n";
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, overrides);
    if (*sweep) return cmd_sweep(config_path, out_dir, overrides, workers);
    return cmd_report(report_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure";
    if (e.step() >= 0) std::cerr << " at step " << e.step();
    std::cerr << ": " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
