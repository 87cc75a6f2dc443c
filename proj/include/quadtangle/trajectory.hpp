#pragma once

#include <vector>

#include "quadtangle/types.hpp"

namespace quadtangle {

/// Sampled solution: dressed coefficients c_k(t) and bare amplitudes
/// beta_{m,n}(t) on a shared time grid (seconds).
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec16> c;
  std::vector<Vec16> beta;

  std::size_t size() const { return times.size(); }
};

}  // namespace quadtangle
