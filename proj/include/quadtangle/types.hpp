#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace quadtangle {

using Complex = std::complex<double>;

/// Dimension of the truncated space: three qubits times cavity levels {0, 1}.
inline constexpr int kDim = 16;

using Vec16 = Eigen::Matrix<Complex, kDim, 1>;
using Mat16 = Eigen::Matrix<Complex, kDim, kDim>;
using RealVec16 = Eigen::Matrix<double, kDim, 1>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Raised when an input violates a documented precondition.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when a numerical procedure fails (non-convergence, norm drift,
// non-finite values). `step()` carries the iteration or time-step index
// where the failure was detected, or -1 when it does not apply.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, long long step = -1)
      : std::runtime_error(what), step_(step) {}
  long long step() const noexcept { return step_; }

 private:
  long long step_;
};

}  // namespace quadtangle
