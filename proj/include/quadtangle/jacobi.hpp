#pragma once

// Cyclic Jacobi eigensolver for small dense Hermitian matrices.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "quadtangle/types.hpp"

namespace quadtangle {

template <int N>
struct HermitianEigen {
  Eigen::Matrix<double, N, 1> values;             // ascending
  Eigen::Matrix<Complex, N, N> vectors;           // column k pairs with values(k)
  int sweeps = 0;
};

struct JacobiOptions {
  double relative_tolerance = 1e-13;  // stop when off-diagonal norm <= tol * ||A||_F
  int max_sweeps = 64;
};

namespace detail {

template <int N>
double off_diagonal_norm(const Eigen::Matrix<Complex, N, N>& a) {
  double s = 0.0;
  for (int p = 0; p < N; ++p)
    for (int q = 0; q < N; ++q)
      if (p != q) s += std::norm(a(p, q));
  return std::sqrt(s);
}

// Phase convention: first component with non-negligible magnitude is real
// and positive.
template <int N>
void fix_phase(Eigen::Matrix<Complex, N, 1>& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (int i = 0; i < N; ++i) {
    const double mag = std::abs(v(i));
    if (mag > 1e-12 * scale) {
      v *= std::conj(v(i)) / mag;
      v(i) = mag;
      return;
    }
  }
}

}  // namespace detail

/// Diagonalizes a Hermitian matrix by cyclic complex Jacobi rotations.
/// Eigenvalues are returned ascending; ties are ordered by the index of the
/// first non-negligible eigenvector component. Throws NumericError when the
/// off-diagonal norm has not converged after `max_sweeps` sweeps.
template <int N>
HermitianEigen<N> jacobi_eigh(const Eigen::Matrix<Complex, N, N>& input,
                              const JacobiOptions& opts = {}) {
  using Mat = Eigen::Matrix<Complex, N, N>;
  Mat a = input;
  Mat v = Mat::Identity();
  const double scale = a.norm();
  const double target = opts.relative_tolerance * scale;

  int sweep = 0;
  for (; sweep < opts.max_sweeps; ++sweep) {
    if (detail::off_diagonal_norm<N>(a) <= target) break;
    for (int p = 0; p < N - 1; ++p) {
      for (int q = p + 1; q < N; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag == 0.0) continue;
        const Complex phase = a(p, q) / mag;  // e^{i phi}
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        // G = diag(1, e^{-i phi}) * [[c, s], [-s, c]]
        const Complex gpp = c;
        const Complex gpq = s;
        const Complex gqp = -s * std::conj(phase);
        const Complex gqq = c * std::conj(phase);

        for (int k = 0; k < N; ++k) {  // A <- A G
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = akp * gpp + akq * gqp;
          a(k, q) = akp * gpq + akq * gqq;
        }
        for (int k = 0; k < N; ++k) {  // A <- G^H A
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
          a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (int k = 0; k < N; ++k) {  // V <- V G
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = vkp * gpp + vkq * gqp;
          v(k, q) = vkp * gpq + vkq * gqq;
        }
      }
    }
  }
  if (detail::off_diagonal_norm<N>(a) > target) {
    throw NumericError("Jacobi eigensolver did not converge after " +
                           std::to_string(sweep) + " sweeps",
                       sweep);
  }

  std::array<int, N> first_nonzero{};
  for (int k = 0; k < N; ++k) {
    Eigen::Matrix<Complex, N, 1> col = v.col(k);
    detail::fix_phase<N>(col);
    v.col(k) = col;
    const double m = col.cwiseAbs().maxCoeff();
    int f = 0;
    while (f < N - 1 && std::abs(col(f)) <= 1e-12 * m) ++f;
    first_nonzero[k] = f;
  }

  std::array<int, N> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    const double ex = a(x, x).real();
    const double ey = a(y, y).real();
    if (ex != ey) return ex < ey;
    return first_nonzero[x] < first_nonzero[y];
  });

  HermitianEigen<N> out;
  for (int k = 0; k < N; ++k) {
    out.values(k) = a(order[k], order[k]).real();
    out.vectors.col(k) = v.col(order[k]);
  }
  out.sweeps = sweep;
  return out;
}

}  // namespace quadtangle
