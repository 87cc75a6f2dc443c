#pragma once

// Revival-period extraction from 4-tangle series, (lambda, eta_L) sweeps,
// period histograms and the position-to-coupling map.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "quadtangle/dynamics.hpp"
#include "quadtangle/hamiltonian.hpp"
#include "quadtangle/tangle.hpp"

namespace quadtangle {

class NoPeriodicityError : public NumericError {
 public:
  using NumericError::NumericError;
};

struct PeriodOptions {
  // Envelope minima must lie in the lowest `zero_threshold` fraction of the
  // envelope's range [min, max].
  double zero_threshold = 0.25;
  // Lower bound on the spacing of accepted minima and on the
  // autocorrelation lag searched for the fundamental period (s).
  double min_separation = 10e-9;
  // Width of the running-max window that removes the fast carrier (s).
  double envelope_window = 20e-9;
  // Gaps may deviate from their mean by at most this fraction.
  double max_spread = 0.2;
};

struct PeriodEstimate {
  double tau = 0.0;                  // mean gap between minima (s)
  std::vector<double> minima_times;  // s, increasing
  double peak_value = 0.0;           // global max of the series
  double rise_time = 0.0;            // first local max above 90% of peak (s)
  bool reliable = false;
  double spread = 0.0;               // max |gap - tau| / tau
  double fundamental = 0.0;          // autocorrelation period of the envelope (s)
  double peak_to_peak_tau = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> maxima_times;
};

namespace detail {

inline std::vector<double> running_max(const std::vector<double>& x, std::size_t half_width) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i > half_width ? i - half_width : 0;
    const std::size_t hi = std::min(n - 1, i + half_width);
    out[i] = *std::max_element(x.begin() + lo, x.begin() + hi + 1);
  }
  return out;
}

// Smallest-lag local maximum of the normalized autocorrelation whose value is
// at least 80% of the largest one, searched over lags in [min_lag, n / 2].
inline std::optional<std::size_t> fundamental_lag(const std::vector<double>& x, std::size_t min_lag) {
  const std::size_t n = x.size();
  if (n < 8) return std::nullopt;
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] - mean;
  const std::size_t max_lag = n / 2;
  min_lag = std::max<std::size_t>(min_lag, 1);
  if (min_lag + 2 >= max_lag) return std::nullopt;

  std::vector<double> r(max_lag + 1, 0.0);
  double r0 = 0.0;
  for (double v : y) r0 += v * v;
  if (r0 == 0.0) return std::nullopt;
  r0 /= double(n);
  for (std::size_t lag = min_lag - 1; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += y[i] * y[i + lag];
    r[lag] = s / double(n - lag) / r0;
  }
  std::vector<std::size_t> peaks;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t lag = min_lag; lag < max_lag; ++lag) {
    if (r[lag] > r[lag - 1] && r[lag] >= r[lag + 1]) {
      peaks.push_back(lag);
      best = std::max(best, r[lag]);
    }
  }
  if (peaks.empty() || best <= 0.0) return std::nullopt;
  for (std::size_t lag : peaks)
    if (r[lag] >= 0.8 * best) return lag;
  return std::nullopt;
}

// Local extrema of `x` (minima when sign = +1, maxima when sign = -1) that
// pass `accept`, thinned greedily from the most extreme so that no two are
// closer than `separation` samples. Returned in index order.
template <typename Accept>
std::vector<std::size_t> select_extrema(const std::vector<double>& x, int sign, std::size_t separation,
                                        Accept&& accept) {
  const std::size_t n = x.size();
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = sign * x[i];
    const bool left = i == 0 || v <= sign * x[i - 1];
    const bool right = i + 1 == n || v < sign * x[i + 1];
    if (left && right && accept(x[i])) cand.push_back(i);
  }
  std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return sign * x[a] < sign * x[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t i : cand) {
    bool clear = true;
    for (std::size_t k : kept) {
      const std::size_t gap = i > k ? i - k : k - i;
      if (gap < separation) {
        clear = false;
        break;
      }
    }
    if (clear) kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

inline std::pair<double, double> mean_gap_and_spread(const std::vector<double>& t) {
  if (t.size() < 2) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double mean = (t.back() - t.front()) / double(t.size() - 1);
  double spread = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) spread = std::max(spread, std::abs(t[i] - t[i - 1] - mean) / mean);
  return {mean, spread};
}

}  // namespace detail

/// Revival period of a tangle series.
///
/// Time of the first local maximum reaching 90% of the series maximum.
inline double rise_time(const TangleSeries& series) {
  const std::size_t n = series.size();
  if (n == 0) throw DomainError("empty series");
  const double peak = series.max();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double v = series.values[i];
    if (v >= series.values[i - 1] && v >= series.values[i + 1] && v >= 0.9 * peak) return series.times[i];
  }
  const auto it = std::max_element(series.values.begin(), series.values.end());
  return series.times[std::size_t(it - series.values.begin())];
}

/// The fast carrier is removed with a running max over `envelope_window`.
/// The envelope's autocorrelation gives a fundamental period P; revivals are
/// the deepest envelope minima in the lowest `zero_threshold` of its range,
/// at least max(min_separation, 0.75 P) apart. tau is their mean spacing.
/// Throws NoPeriodicityError when fewer than two minima qualify.
inline PeriodEstimate extract_period(const TangleSeries& series, const PeriodOptions& opts = {}) {
  const std::size_t n = series.size();
  if (n < 3) throw NoPeriodicityError("series too short for period extraction");
  const double dt = series.times[1] - series.times[0];
  if (!(dt > 0.0)) throw DomainError("series time grid must be increasing");

  PeriodEstimate est;
  est.peak_value = series.max();
  est.rise_time = rise_time(series);

  const auto half = static_cast<std::size_t>(std::floor(opts.envelope_window / dt / 2.0));
  const std::vector<double> env = half > 0 ? detail::running_max(series.values, half) : series.values;
  const auto [lo_it, hi_it] = std::minmax_element(env.begin(), env.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw NoPeriodicityError("no periodicity detected: flat series");

  const auto min_sep = static_cast<std::size_t>(std::ceil(opts.min_separation / dt));
  const auto lag = detail::fundamental_lag(env, min_sep);
  std::size_t separation = std::max<std::size_t>(min_sep, 1);
  if (lag) {
    est.fundamental = double(*lag) * dt;
    separation = std::max(separation, static_cast<std::size_t>(0.75 * double(*lag)));
  }

  const double floor_cut = lo + opts.zero_threshold * (hi - lo);
  const double ceil_cut = hi - opts.zero_threshold * (hi - lo);
  const auto minima = detail::select_extrema(env, +1, separation, [&](double v) { return v <= floor_cut; });
  const auto maxima = detail::select_extrema(env, -1, separation, [&](double v) { return v >= ceil_cut; });
  for (std::size_t i : minima) est.minima_times.push_back(series.times[i]);
  for (std::size_t i : maxima) est.maxima_times.push_back(series.times[i]);
  est.peak_to_peak_tau = detail::mean_gap_and_spread(est.maxima_times).first;

  if (est.minima_times.size() < 2) {
    throw NoPeriodicityError("no periodicity detected: fewer than two revival minima");
  }
  std::tie(est.tau, est.spread) = detail::mean_gap_and_spread(est.minima_times);
  est.reliable = est.spread <= opts.max_spread;
  return est;
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepGrid {
  std::vector<double> lambda_values;  // eta_M / eta_L, in [0, 1]
  std::vector<double> eta_L_values;   // rad/s; eta_R follows eta_L
  SystemParams fixed;
  InitialState init = InitialState::mixed();
  IntegratorConfig cfg;
  PeriodOptions period;

  void validate() const {
    for (double l : lambda_values)
      if (!(l >= 0.0 && l <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
    for (double e : eta_L_values)
      if (!(e >= 0.0) || !std::isfinite(e)) throw DomainError("eta_L must be non-negative");
    cfg.validate();
  }

  SystemParams params_at(double lambda, double eta_L) const {
    SystemParams p = fixed;
    p.eta_L = eta_L;
    p.eta_R = eta_L;
    p.eta_M = lambda * eta_L;
    return p;
  }
};

struct SweepRecord {
  double lambda = 0.0;
  double eta_L = 0.0;  // rad/s
  double tau = std::numeric_limits<double>::quiet_NaN();
  double peak_value = std::numeric_limits<double>::quiet_NaN();
  bool reliable = false;
  double min_tangle = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty on success

  bool failed() const { return !error.empty(); }
};

struct SweepResult {
  std::vector<SweepRecord> records;  // row-major: lambda outer, eta_L inner
};

struct PointOutcome {
  PeriodEstimate period;
  double min_tangle = 0.0;
  double max_tangle = 0.0;
};

/// build -> diagonalize -> evolve -> tangle_series -> extract_period.
inline TangleSeries simulate_series(const SystemParams& p, const InitialState& init, const IntegratorConfig& cfg) {
  const DressedBasis basis = diagonalize(build_closed_hamiltonian(p));
  const GammaMatrix gamma = gamma_matrix(basis);
  return tangle_series(evolve(basis, gamma, p, init, cfg));
}

inline SweepRecord evaluate_point(const SweepGrid& grid, double lambda, double eta_L) {
  SweepRecord rec;
  rec.lambda = lambda;
  rec.eta_L = eta_L;
  try {
    const TangleSeries s = simulate_series(grid.params_at(lambda, eta_L), grid.init, grid.cfg);
    rec.min_tangle = s.min();
    rec.peak_value = s.max();
    const PeriodEstimate est = extract_period(s, grid.period);
    rec.tau = est.tau;
    rec.reliable = est.reliable;
  } catch (const std::exception& e) {
    rec.error = e.what();
  }
  return rec;
}

/// Evaluates every grid point on `workers` threads (0 = hardware
/// concurrency). Output order is row-major (lambda, then eta_L) regardless of
/// scheduling; a failing point is recorded and the sweep continues.
template <typename Progress>
SweepResult run_sweep(const SweepGrid& grid, unsigned workers, Progress&& progress) {
  grid.validate();
  const std::size_t ne = grid.eta_L_values.size();
  const std::size_t total = grid.lambda_values.size() * ne;
  SweepResult result;
  result.records.resize(total);
  if (total == 0) return result;

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t done = 0;
  auto work = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      SweepRecord rec = evaluate_point(grid, grid.lambda_values[i / ne], grid.eta_L_values[i % ne]);
      std::lock_guard lock(mu);
      result.records[i] = std::move(rec);
      progress(++done, total, result.records[i]);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return result;
}

inline SweepResult run_sweep(const SweepGrid& grid, unsigned workers = 0) {
  return run_sweep(grid, workers, [](std::size_t, std::size_t, const SweepRecord&) {});
}

// ---------------------------------------------------------------------------
// Histogram

struct Histogram {
  double bin_width = 0.025;
  std::vector<double> summed_tau;  // s, per slot [k w, (k+1) w)
  std::vector<int> counts;
  int excluded = 0;                // unreliable or failed records

  std::size_t argmax() const {
    return std::size_t(std::max_element(summed_tau.begin(), summed_tau.end()) - summed_tau.begin());
  }
  double bin_lo(std::size_t k) const { return double(k) * bin_width; }
};

inline std::size_t bin_index(double lambda, double width) {
  // Grid values sit on bin edges; nudge by a relative epsilon so that
  // 14 * 0.025 lands in slot 14 rather than 13.
  return static_cast<std::size_t>(std::floor(lambda / width * (1.0 + 1e-12) + 1e-12));
}

inline Histogram bin_histogram(const SweepResult& result, double bin_width = 0.025) {
  if (!(bin_width > 0.0)) throw DomainError("bin_width must be positive");
  Histogram h;
  h.bin_width = bin_width;
  for (const auto& r : result.records) {
    if (r.failed() || !r.reliable) {
      ++h.excluded;
      continue;
    }
    const std::size_t k = bin_index(r.lambda, bin_width);
    if (k >= h.summed_tau.size()) {
      h.summed_tau.resize(k + 1, 0.0);
      h.counts.resize(k + 1, 0);
    }
    h.summed_tau[k] += r.tau;
    h.counts[k] += 1;
  }
  return h;
}

// ---------------------------------------------------------------------------

/// Coupling of a qubit at distance x from the centre antinode of a
/// full-wavelength stripline mode: eta_max * |cos(2 pi x / L)|, 0 <= x <= L/4.
inline double coupling_from_position(double x, double cavity_length, double eta_max) {
  if (!(cavity_length > 0.0)) throw DomainError("cavity length must be positive");
  if (!(x >= 0.0 && x <= cavity_length / 4.0)) throw DomainError("position must lie in [0, L/4]");
  return eta_max * std::abs(std::cos(kTwoPi * x / cavity_length));
}

}  // namespace quadtangle
