#pragma once

// Squared bipartition concurrences and the degree-4 polynomial invariant
// ("4-tangle") of pure states of the L, M, R qubits plus cavity C.

#include <array>
#include <string>
#include <vector>

#include "quadtangle/hilbert.hpp"
#include "quadtangle/trajectory.hpp"

namespace quadtangle {

/// Norm tolerance accepted by the tangle functions.
inline constexpr double kTangleNormTolerance = 1e-6;

/// C^2 = 2 (1 - tr rho_S^2) for the bipartition S | complement(S).
inline double concurrence_sq(const PureState& state, SubsystemMask subset) {
  return 2.0 * (1.0 - purity(partial_trace(state, subset)));
}

/// All proper subsets of {L, M, R, C} with exactly `size` members.
inline std::vector<SubsystemMask> subsets_of_size(int size) {
  std::vector<SubsystemMask> out;
  for (unsigned bits = 1; bits < 15; ++bits) {
    SubsystemMask s(bits);
    if (s.size() == size) out.push_back(s);
  }
  return out;
}

/// |H|^2 = 1/2 sum_{j=1..3} (-1)^{j+1} sum_{|S|=j} C^2_{S}, over all 14
/// proper subsets.
inline double four_tangle(const PureState& state) {
  double total = 0.0;
  for (unsigned bits = 1; bits < 15; ++bits) {
    const SubsystemMask s(bits);
    const double sign = (s.size() % 2 == 1) ? 1.0 : -1.0;
    total += sign * concurrence_sq(state, s);
  }
  return 0.5 * total;
}

/// Same quantity via complement symmetry of pure states: the four single-site
/// terms minus the three 2|2 partitions.
inline double four_tangle_collapsed(const PureState& state) {
  using enum Subsystem;
  double singles = 0.0;
  for (auto s : {L, M, R, C}) singles += concurrence_sq(state, SubsystemMask{s});
  const double pairs = concurrence_sq(state, SubsystemMask{L, M}) + concurrence_sq(state, SubsystemMask{L, R}) +
                       concurrence_sq(state, SubsystemMask{L, C});
  return singles - pairs;
}

struct TangleSeries {
  std::vector<double> times;   // s
  std::vector<double> values;  // |H(t)|^2, unclamped

  std::size_t size() const { return times.size(); }
  double min() const;
  double max() const;
};

inline double TangleSeries::min() const {
  double m = values.empty() ? 0.0 : values.front();
  for (double v : values) m = std::min(m, v);
  return m;
}

inline double TangleSeries::max() const {
  double m = values.empty() ? 0.0 : values.front();
  for (double v : values) m = std::max(m, v);
  return m;
}

inline TangleSeries tangle_series(const Trajectory& traj) {
  TangleSeries out;
  out.times = traj.times;
  out.values.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    try {
      out.values.push_back(four_tangle(PureState(traj.beta[i], kTangleNormTolerance)));
    } catch (const DomainError& e) {
      throw DomainError("sample " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

/// Reporting-time clamp: values in [-1e-9, 0) are shown as 0.
inline double clamp_for_report(double v) { return (v < 0.0 && v >= -1e-9) ? 0.0 : v; }

}  // namespace quadtangle
