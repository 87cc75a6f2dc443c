#pragma once

#include <algorithm>
#include <cmath>

#include "quadtangle/dynamics.hpp"
#include "quadtangle/tangle.hpp"

namespace quadtangle {

/// Runs the evolution at dt and dt/2 on the same sample grid and returns
/// max_t |tangle_dt(t) - tangle_dt/2(t)|. Deviations <= 1e-6 count as
/// converged.
inline double convergence_probe(const DressedBasis& basis, const GammaMatrix& gamma, const SystemParams& params,
                                const InitialState& init, const IntegratorConfig& cfg) {
  if (!cfg.convergence_check) throw DomainError("convergence_probe requires convergence_check in the config");
  IntegratorConfig fine = cfg;
  fine.dt = cfg.dt / 2.0;
  fine.sample_stride = cfg.sample_stride * 2;

  const TangleSeries coarse_series = tangle_series(evolve(basis, gamma, params, init, cfg));
  const TangleSeries fine_series = tangle_series(evolve(basis, gamma, params, init, fine));
  const std::size_t n = std::min(coarse_series.size(), fine_series.size());
  double dev = 0.0;
  for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(coarse_series.values[i] - fine_series.values[i]));
  return dev;
}

inline constexpr double kConvergedDeviation = 1e-6;

}  // namespace quadtangle
