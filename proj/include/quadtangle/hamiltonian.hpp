#pragma once

// Closed qubit-cavity Hamiltonian H0 + H_int on the truncated space, its
// dressed-state decomposition, and the cavity annihilation operator in the
// dressed basis.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "quadtangle/hilbert.hpp"
#include "quadtangle/jacobi.hpp"
#include "quadtangle/types.hpp"

namespace quadtangle {

/// How the qubit free energy Omega * sigma_z is read.
///  Full: Omega * sigma_z, so the qubit transition frequency is 2 * Omega.
///  Half: (Omega / 2) * sigma_z, so the transition frequency is Omega.
enum class QubitZConvention { Full, Half };

inline double z_prefactor(QubitZConvention c) { return c == QubitZConvention::Half ? 0.5 : 1.0; }

inline const char* to_string(QubitZConvention c) { return c == QubitZConvention::Half ? "half" : "full"; }

/// Physical parameters, all angular frequencies in rad/s.
struct SystemParams {
  double omega_c = 0.0;
  double Omega_L = 0.0;
  double Omega_M = 0.0;
  double Omega_R = 0.0;
  double eta_L = 0.0;
  double eta_M = 0.0;
  double eta_R = 0.0;
  double epsilon_D = 0.0;
  double omega_D = 0.0;
  QubitZConvention z_convention = QubitZConvention::Full;

  std::array<double, 3> qubit_frequencies() const { return {Omega_L, Omega_M, Omega_R}; }
  std::array<double, 3> couplings() const { return {eta_L, eta_M, eta_R}; }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Transmon/stripline values with homogeneous 300 MHz couplings.
inline SystemParams reference_params() {
  SystemParams p;
  p.omega_c = kTwoPi * 6.13e9;
  p.Omega_L = kTwoPi * 6.112e9;
  p.Omega_M = kTwoPi * 6.111e9;
  p.Omega_R = kTwoPi * 6.112e9;
  p.eta_L = p.eta_M = p.eta_R = kTwoPi * 300e6;
  p.epsilon_D = kTwoPi * 200e3;
  p.omega_D = kTwoPi * 6.11e9;
  return p;
}

/// Throws DomainError on invalid parameters. Returns advisory warnings, e.g.
/// when the drive is too strong for the one-photon truncation.
inline std::vector<std::string> validate(const SystemParams& p) {
  auto finite = [](double x) { return std::isfinite(x); };
  const std::array<std::pair<const char*, double>, 5> freqs{{{"omega_c", p.omega_c},
                                                             {"Omega_L", p.Omega_L},
                                                             {"Omega_M", p.Omega_M},
                                                             {"Omega_R", p.Omega_R},
                                                             {"omega_D", p.omega_D}}};
  for (const auto& [name, v] : freqs) {
    if (!finite(v) || v <= 0.0) throw DomainError(std::string(name) + " must be a positive frequency");
  }
  const std::array<std::pair<const char*, double>, 4> nonneg{
      {{"eta_L", p.eta_L}, {"eta_M", p.eta_M}, {"eta_R", p.eta_R}, {"epsilon_D", p.epsilon_D}}};
  for (const auto& [name, v] : nonneg) {
    if (!finite(v) || v < 0.0) throw DomainError(std::string(name) + " must be non-negative");
  }
  std::vector<std::string> warnings;
  const double eta_max = std::max({p.eta_L, p.eta_M, p.eta_R});
  if (p.epsilon_D > 0.1 * eta_max) {
    warnings.emplace_back(
        "epsilon_D exceeds 0.1 * max(eta): the one-photon truncation assumes weak driving");
  }
  return warnings;
}

/// H0 + H_int on the 16-state space (rad/s). Photon amplitudes that would
/// leave n <= 1 are dropped.
inline Mat16 build_closed_hamiltonian(const SystemParams& p) {
  validate(p);
  Mat16 h = Mat16::Zero();
  const auto omega = p.qubit_frequencies();
  const auto eta = p.couplings();
  const double zf = z_prefactor(p.z_convention);

  for (int m = 0; m < 8; ++m) {
    double qubits = 0.0;
    for (int q = 0; q < 3; ++q) {
      const bool excited = (m >> (2 - q)) & 1;
      qubits += zf * omega[q] * (excited ? 1.0 : -1.0);
    }
    for (int n = 0; n < 2; ++n) h(2 * m + n, 2 * m + n) = p.omega_c * n + qubits;
  }
  // eta (a sigma_+ + a^dag sigma_-): |m, 1> <-> |m with qubit q raised, 0>.
  for (int m = 0; m < 8; ++m) {
    for (int q = 0; q < 3; ++q) {
      const int bit = 1 << (2 - q);
      if (m & bit) continue;
      const int lower = 2 * m + 1;
      const int upper = 2 * (m | bit);
      h(lower, upper) = eta[q];
    }
  }
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < i; ++j) h(i, j) = std::conj(h(j, i));
  return h;
}

/// Dressed states |u_k> = sum_i alpha(k, i) |i>, with energies ascending.
struct DressedBasis {
  RealVec16 energies;
  Mat16 alpha;                   // row k holds the bare components of |u_k>
  std::array<int, kDim> excitation{};  // conserved excitation number of |u_k>
  int sweeps = 0;

  Vec16 state(int k) const { return alpha.row(k).transpose(); }
};

inline double hermiticity_defect(const Mat16& h) { return (h - h.adjoint()).cwiseAbs().maxCoeff(); }

inline DressedBasis diagonalize(const Mat16& h) {
  const double scale = std::max(1.0, h.norm());
  if (!h.allFinite()) throw DomainError("Hamiltonian has non-finite entries");
  if (hermiticity_defect(h) > 1e-12 * scale) throw DomainError("Hamiltonian is not Hermitian");

  const auto eig = jacobi_eigh<kDim>(h);
  DressedBasis out;
  out.energies = eig.values;
  out.alpha = eig.vectors.transpose();
  out.sweeps = eig.sweeps;

  for (int k = 0; k < kDim; ++k) {
    int arg = 0;
    out.alpha.row(k).cwiseAbs().maxCoeff(&arg);
    out.excitation[k] = excitation_number(arg);
    const Vec16 u = out.state(k);
    const double residual = (h * u - out.energies(k) * u).norm();
    if (residual > 1e-10 * scale) {
      throw NumericError("eigen-residual " + std::to_string(residual) + " for dressed state " +
                             std::to_string(k),
                         out.sweeps);
    }
  }
  return out;
}

/// gamma(j, k) = <u_j| a |u_k>.
struct GammaMatrix {
  Mat16 g;

  Complex operator()(int j, int k) const { return g(j, k); }
};

/// Bare-basis cavity annihilator: sum_m |phi_m, 0><phi_m, 1|.
inline Mat16 annihilation_bare() {
  Mat16 a = Mat16::Zero();
  for (int m = 0; m < 8; ++m) a(2 * m, 2 * m + 1) = 1.0;
  return a;
}

inline GammaMatrix gamma_matrix(const DressedBasis& basis) {
  GammaMatrix out;
  for (int j = 0; j < kDim; ++j) {
    for (int k = 0; k < kDim; ++k) {
      Complex s = 0.0;
      for (int m = 0; m < 8; ++m) s += std::conj(basis.alpha(j, 2 * m)) * basis.alpha(k, 2 * m + 1);
      out.g(j, k) = s;
    }
  }
  return out;
}

}  // namespace quadtangle
