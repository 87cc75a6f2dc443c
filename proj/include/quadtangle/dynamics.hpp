#pragma once

// Driven evolution of the dressed coefficients
//
//   dc_k/dt = -i E_k c_k - eps_D sum_j [e^{i w_D t} gamma_kj - e^{-i w_D t} conj(gamma_jk)] c_j
//
// integrated in the interaction picture c_k = e^{-i E_k t} d_k with
// fixed-step classical RK4 on d.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "quadtangle/hamiltonian.hpp"
#include "quadtangle/hilbert.hpp"
#include "quadtangle/trajectory.hpp"
#include "quadtangle/types.hpp"

namespace quadtangle {

class InitialState {
 public:
  using Term = std::pair<BareIndex, Complex>;

  /// |phi_0, 1>: one photon, all qubits ground.
  static InitialState photon() { return InitialState("PHOTON", {{{0, 1}, 1.0}}); }

  /// sqrt(0.8)|phi_0,1> + sqrt(0.1)|phi_4,0> + sqrt(0.1)|phi_4,1>: mostly
  /// photon with qubit L slightly inverted.
  static InitialState mixed() {
    return InitialState("MIXED", {{{0, 1}, std::sqrt(0.8)}, {{4, 0}, std::sqrt(0.1)}, {{4, 1}, std::sqrt(0.1)}});
  }

  static InitialState preset(const std::string& name) {
    if (name == "PHOTON") return photon();
    if (name == "MIXED" || name == "FIG3") return mixed();
    throw DomainError("unknown initial-state preset '" + name + "' (expected PHOTON or MIXED)");
  }

  /// Explicit amplitudes; validated to unit norm within 1e-12, never rescaled.
  static InitialState explicit_terms(std::vector<Term> terms) { return InitialState("", std::move(terms)); }

  static InitialState from_vector(const Vec16& v) {
    std::vector<Term> terms;
    for (int i = 0; i < kDim; ++i)
      if (v(i) != Complex(0.0)) terms.emplace_back(bare_index(i), v(i));
    return explicit_terms(std::move(terms));
  }

  const std::string& preset_name() const { return name_; }
  bool is_preset() const { return !name_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  Vec16 bare_amplitudes() const {
    Vec16 v = Vec16::Zero();
    for (const auto& [idx, amp] : terms_) v(flat_index(idx)) += amp;
    return v;
  }

 private:
  InitialState(std::string name, std::vector<Term> terms) : name_(std::move(name)), terms_(std::move(terms)) {
    const double n2 = bare_amplitudes().squaredNorm();
    if (!std::isfinite(n2) || std::abs(n2 - 1.0) > 1e-12) {
      throw DomainError("initial state is not normalized: |psi|^2 = " + std::to_string(n2));
    }
  }

  std::string name_;
  std::vector<Term> terms_;
};

struct IntegratorConfig {
  double t_end = 2e-6;
  double dt = 1e-12;
  int sample_stride = 100;
  bool convergence_check = false;

  long long steps() const { return std::llround(t_end / dt); }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    if (!(t_end >= dt) || !std::isfinite(t_end)) throw DomainError("t_end must be at least dt");
    if (sample_stride < 1) throw DomainError("sample_stride must be >= 1");
  }
};

/// Largest phase advance per step among the drive-coupled transitions,
/// max |E_k - E_j + w_D| * dt over nonzero gamma_kj. Values above about
/// 0.1 rad call for a smaller dt.
inline double phase_per_step(const DressedBasis& basis, const GammaMatrix& gamma, const SystemParams& p, double dt) {
  double w = 0.0;
  for (int k = 0; k < kDim; ++k)
    for (int j = 0; j < kDim; ++j)
      if (gamma(k, j) != Complex(0.0)) w = std::max(w, std::abs(basis.energies(k) - basis.energies(j) + p.omega_D));
  return w * std::abs(dt);
}

inline Vec16 to_bare(const Vec16& c, const DressedBasis& basis) { return basis.alpha.transpose() * c; }

inline Vec16 to_dressed(const Vec16& beta, const DressedBasis& basis) { return basis.alpha.conjugate() * beta; }

namespace detail {

// Plain complex product; std::complex's operator* carries Annex G NaN
// recovery that dominates the inner loop.
inline Complex cmul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

}  // namespace detail

/// Fixed-step RK4 propagator for the driven dressed-basis equations.
///
/// gamma only links dressed states whose excitation numbers differ by one,
/// so it is stored as a list of its nonzero entries. In the interaction
/// picture each entry (k, j) contributes
///   d_k' += Phi(t) d_j,   d_j' -= conj(Phi(t)) d_k,
///   Phi(t) = -eps_D gamma_kj exp(i (E_k - E_j + w_D) t),
/// and the phases are advanced by recurrence, resynchronized every 1024 steps.
class DrivenPropagator {
 public:
  static constexpr double kMaxNormDrift = 1e-6;

  DrivenPropagator(const DressedBasis& basis, const GammaMatrix& gamma, const SystemParams& params)
      : energies_(basis.energies) {
    for (int k = 0; k < kDim; ++k) {
      for (int j = 0; j < kDim; ++j) {
        if (gamma(k, j) == Complex(0.0)) continue;
        entries_.push_back({k, j, -params.epsilon_D * gamma(k, j),
                            basis.energies(k) - basis.energies(j) + params.omega_D});
      }
    }
  }

  std::size_t nonzero_couplings() const { return entries_.size(); }

  /// Advances dressed coefficients `c0` from t0 by `nsteps` steps of `dt`
  /// (dt may be negative). `observe(step, t, c)` is called after every step
  /// whose index is a multiple of `stride`. Returns the final coefficients.
  template <typename Observer>
  Vec16 propagate(const Vec16& c0, double t0, double dt, long long nsteps, int stride, Observer&& observe) const {
    using detail::cmul;
    constexpr long long kResync = 1024;
    const std::size_t ne = entries_.size();
    std::vector<Complex> phi(ne), phi_mid(ne), phi_end(ne), half_step(ne);
    for (std::size_t e = 0; e < ne; ++e) half_step[e] = std::polar(1.0, entries_[e].freq * dt * 0.5);
    auto exact_couplings = [&](double t) {
      for (std::size_t e = 0; e < ne; ++e) phi[e] = entries_[e].base * std::polar(1.0, entries_[e].freq * t);
    };
    auto dressed = [&](double t, const Vec16& d) {
      Vec16 c;
      for (int k = 0; k < kDim; ++k) c(k) = d(k) * std::polar(1.0, -energies_(k) * t);
      return c;
    };
    auto rhs = [&](const std::vector<Complex>& coupling, const Vec16& d, Vec16& out) {
      out.setZero();
      for (std::size_t e = 0; e < ne; ++e) {
        const Entry& en = entries_[e];
        out(en.k) += cmul(coupling[e], d(en.j));
        out(en.j) -= cmul(std::conj(coupling[e]), d(en.k));
      }
    };

    Vec16 d;
    for (int k = 0; k < kDim; ++k) d(k) = c0(k) * std::polar(1.0, energies_(k) * t0);
    const double norm0 = c0.squaredNorm();
    exact_couplings(t0);

    Vec16 k1, k2, k3, k4, tmp;
    const double h = dt;
    for (long long s = 0; s < nsteps; ++s) {
      if (s % kResync == 0 && s != 0) exact_couplings(t0 + double(s) * dt);
      for (std::size_t e = 0; e < ne; ++e) {
        phi_mid[e] = cmul(phi[e], half_step[e]);
        phi_end[e] = cmul(phi_mid[e], half_step[e]);
      }
      rhs(phi, d, k1);
      for (int k = 0; k < kDim; ++k) tmp(k) = d(k) + (0.5 * h) * k1(k);
      rhs(phi_mid, tmp, k2);
      for (int k = 0; k < kDim; ++k) tmp(k) = d(k) + (0.5 * h) * k2(k);
      rhs(phi_mid, tmp, k3);
      for (int k = 0; k < kDim; ++k) tmp(k) = d(k) + h * k3(k);
      rhs(phi_end, tmp, k4);

      double n2 = 0.0;
      for (int k = 0; k < kDim; ++k) {
        d(k) += (h / 6.0) * (k1(k) + 2.0 * (k2(k) + k3(k)) + k4(k));
        n2 += std::norm(d(k));
      }
      if (!std::isfinite(n2)) throw NumericError("non-finite amplitude at step " + std::to_string(s + 1), s + 1);
      if (std::abs(n2 - norm0) > kMaxNormDrift) {
        throw NumericError("norm drift " + std::to_string(n2 - norm0) + " at step " + std::to_string(s + 1) +
                               "; reduce dt",
                           s + 1);
      }
      phi.swap(phi_end);

      if ((s + 1) % stride == 0) {
        const double t = t0 + double(s + 1) * dt;
        observe(s + 1, t, dressed(t, d));
      }
    }
    return dressed(t0 + double(nsteps) * dt, d);
  }

 private:
  struct Entry {
    int k;
    int j;
    Complex base;  // -eps_D * gamma_kj
    double freq;   // E_k - E_j + w_D
  };

  RealVec16 energies_;
  std::vector<Entry> entries_;
};

inline Trajectory evolve(const DressedBasis& basis, const GammaMatrix& gamma, const SystemParams& params,
                         const InitialState& init, const IntegratorConfig& cfg) {
  cfg.validate();
  const DrivenPropagator prop(basis, gamma, params);
  const Vec16 c0 = to_dressed(init.bare_amplitudes(), basis);
  const long long steps = cfg.steps();

  Trajectory traj;
  const std::size_t samples = static_cast<std::size_t>(steps / cfg.sample_stride) + 1;
  traj.times.reserve(samples);
  traj.c.reserve(samples);
  traj.beta.reserve(samples);
  auto store = [&](double t, const Vec16& c) {
    traj.times.push_back(t);
    traj.c.push_back(c);
    traj.beta.push_back(to_bare(c, basis));
  };
  store(0.0, c0);
  prop.propagate(c0, 0.0, cfg.dt, steps, cfg.sample_stride,
                 [&](long long, double t, const Vec16& c) { store(t, c); });
  return traj;
}

}  // namespace quadtangle
