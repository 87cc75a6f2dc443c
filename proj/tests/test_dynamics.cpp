#include <gtest/gtest.h>

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "oracles.hpp"
#include "quadtangle/convergence.hpp"
#include "quadtangle/dynamics.hpp"
#include "quadtangle/tangle.hpp"

using namespace quadtangle;

namespace {

struct Model {
  SystemParams params;
  DressedBasis basis;
  GammaMatrix gamma;

  explicit Model(const SystemParams& p)
      : params(p), basis(diagonalize(build_closed_hamiltonian(p))), gamma(gamma_matrix(basis)) {}
};

SystemParams resonant_single_qubit() {
  SystemParams p = reference_params();
  p.z_convention = QubitZConvention::Half;
  p.eta_M = p.eta_R = 0.0;
  p.Omega_L = p.omega_c;
  p.epsilon_D = 0.0;
  return p;
}

IntegratorConfig short_run(double t_end, int stride = 10) {
  IntegratorConfig cfg;
  cfg.t_end = t_end;
  cfg.dt = 1e-12;
  cfg.sample_stride = stride;
  return cfg;
}

}  // namespace

TEST(InitialState, PresetsAreNormalized) {
  EXPECT_NEAR(InitialState::photon().bare_amplitudes().squaredNorm(), 1.0, 1e-15);
  const Vec16 v = InitialState::mixed().bare_amplitudes();
  EXPECT_NEAR(v.squaredNorm(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(v(flat_index({0, 1})).real(), std::sqrt(0.8));
  EXPECT_DOUBLE_EQ(v(flat_index({4, 0})).real(), std::sqrt(0.1));
  EXPECT_DOUBLE_EQ(v(flat_index({4, 1})).real(), std::sqrt(0.1));
  EXPECT_EQ(InitialState::preset("PHOTON").preset_name(), "PHOTON");
}

TEST(InitialState, RejectsUnnormalizedAndUnknown) {
  EXPECT_THROW(InitialState::explicit_terms({{{0, 1}, 0.9}}), DomainError);
  EXPECT_THROW(InitialState::preset("GHZ"), DomainError);
}

TEST(IntegratorConfig, Validation) {
  IntegratorConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.dt = 0.0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.t_end = cfg.dt / 2;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.sample_stride = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
}

TEST(RecommendedStep, DefaultStepKeepsPhaseAdvanceSmall) {
  const Model m(reference_params());
  EXPECT_LE(phase_per_step(m.basis, m.gamma, m.params, 1e-12), 0.12);
}

TEST(ToBare, UnitDressedVectorGivesAlphaRow) {
  const Model m(reference_params());
  for (int k = 0; k < kDim; ++k) {
    Vec16 c = Vec16::Zero();
    c(k) = 1.0;
    EXPECT_LT((to_bare(c, m.basis) - m.basis.state(k)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(ToBare, UncoupledIsPermutation) {
  SystemParams p = reference_params();
  p.eta_L = p.eta_M = p.eta_R = 0.0;
  const Model m(p);
  std::mt19937_64 rng(3);
  const Vec16 c = oracle::random_state(rng);
  const Vec16 beta = to_bare(c, m.basis);
  std::vector<double> a, b;
  for (int i = 0; i < kDim; ++i) {
    a.push_back(std::abs(c(i)));
    b.push_back(std::abs(beta(i)));
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  for (int i = 0; i < kDim; ++i) EXPECT_DOUBLE_EQ(a[i], b[i]);
}

TEST(ToBare, PreservesNormAndInvertsToDressed) {
  const Model m(reference_params());
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec16 c = oracle::random_state(rng);
    const Vec16 beta = to_bare(c, m.basis);
    EXPECT_NEAR(beta.norm(), c.norm(), 1e-12);
    EXPECT_LT((to_dressed(beta, m.basis) - c).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Evolve, UndrivenDressedStateIsStationary) {
  SystemParams p = reference_params();
  p.epsilon_D = 0.0;
  const Model m(p);
  const int k = 5;
  const auto traj = evolve(m.basis, m.gamma, p, InitialState::from_vector(m.basis.state(k)), short_run(5e-9, 100));
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const Complex expected = std::polar(1.0, -m.basis.energies(k) * traj.times[s]);
    EXPECT_LT(std::abs(traj.c[s](k) - expected), 1e-9);
    for (int j = 0; j < kDim; ++j)
      if (j != k) EXPECT_LT(std::abs(traj.c[s](j)), 1e-12);
  }
  const TangleSeries series = tangle_series(traj);
  for (double v : series.values) EXPECT_NEAR(v, series.values.front(), 1e-12);
}

TEST(Evolve, VacuumRabiOscillation) {
  const SystemParams p = resonant_single_qubit();
  const Model m(p);
  const double rabi_period = M_PI / p.eta_L;
  const auto traj = evolve(m.basis, m.gamma, p, InitialState::photon(), short_run(5 * rabi_period, 10));
  const int excited = flat_index({4, 0});
  double worst = 0.0;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    const double expected = std::pow(std::sin(p.eta_L * traj.times[s]), 2);
    worst = std::max(worst, std::abs(std::norm(traj.beta[s](excited)) - expected));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Evolve, BetaIsAlphaTransformOfC) {
  const Model m(reference_params());
  const auto traj = evolve(m.basis, m.gamma, m.params, InitialState::mixed(), short_run(2e-9, 50));
  for (std::size_t s = 0; s < traj.size(); ++s) {
    EXPECT_LT((traj.beta[s] - to_bare(traj.c[s], m.basis)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(traj.c[s].squaredNorm(), 1.0, 1e-9);
  }
}

// Exact propagator of the Hamiltonian frozen at each 0.01 ps sub-step
// midpoint, applied in the dressed basis: H = diag(E) - i eps (e^{iwt} G - e^{-iwt} G^H).
static Vec16 frozen_propagator(const Model& m, const Vec16& c0, double t_end, double sub) {
  const long long n = std::llround(t_end / sub);
  Vec16 c = c0;
  const Mat16 g = m.gamma.g;
  const Mat16 gh = g.adjoint();
  for (long long s = 0; s < n; ++s) {
    const double t = (double(s) + 0.5) * sub;
    Mat16 h = Mat16::Zero();
    h.diagonal() = m.basis.energies.cast<Complex>();
    const Complex w = std::polar(1.0, m.params.omega_D * t);
    h += Complex(0.0, -m.params.epsilon_D) * (w * g - std::conj(w) * gh);
    const Mat16 u = (Complex(0.0, -sub) * h).exp();
    c = u * c;
  }
  return c;
}

TEST(Evolve, MatchesFrozenHamiltonianMatrixExponential) {
  for (double eps_hz : {200e3, 50e6}) {
    SystemParams p = reference_params();
    p.epsilon_D = kTwoPi * eps_hz;
    const Model m(p);
    const double window = 1e-9;
    const auto traj = evolve(m.basis, m.gamma, p, InitialState::mixed(), short_run(window, 1000));
    const Vec16 c0 = to_dressed(InitialState::mixed().bare_amplitudes(), m.basis);
    const Vec16 ref = frozen_propagator(m, c0, window, 1e-14);
    EXPECT_LE((traj.c.back() - ref).cwiseAbs().maxCoeff(), 1e-6) << "eps/2pi = " << eps_hz;
  }
}

TEST(Evolve, ForwardThenBackwardReturnsInitialState) {
  for (double eps : {0.0, kTwoPi * 200e3}) {
    SystemParams p = reference_params();
    p.epsilon_D = eps;
    const Model m(p);
    const DrivenPropagator prop(m.basis, m.gamma, p);
    const Vec16 c0 = to_dressed(InitialState::mixed().bare_amplitudes(), m.basis);
    const long long steps = 20000;
    const double dt = 1e-12;
    auto ignore = [](long long, double, const Vec16&) {};
    const Vec16 forward = prop.propagate(c0, 0.0, dt, steps, steps, ignore);
    const Vec16 back = prop.propagate(forward, double(steps) * dt, -dt, steps, steps, ignore);
    EXPECT_LE((back - c0).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Evolve, TangleInvariantUnderCommonFrequencyShift) {
  for (auto conv : {QubitZConvention::Full, QubitZConvention::Half}) {
    SystemParams p = reference_params();
    p.z_convention = conv;
    const double delta = kTwoPi * 25e6;
    SystemParams q = p;
    const double qubit_shift = conv == QubitZConvention::Half ? delta : delta / 2.0;
    q.Omega_L += qubit_shift;
    q.Omega_M += qubit_shift;
    q.Omega_R += qubit_shift;
    q.omega_c += delta;
    q.omega_D += delta;
    const Model a(p), b(q);
    const auto cfg = short_run(50e-9, 100);
    const TangleSeries sa = tangle_series(evolve(a.basis, a.gamma, p, InitialState::mixed(), cfg));
    const TangleSeries sb = tangle_series(evolve(b.basis, b.gamma, q, InitialState::mixed(), cfg));
    ASSERT_EQ(sa.size(), sb.size());
    for (std::size_t i = 0; i < sa.size(); ++i) EXPECT_NEAR(sa.values[i], sb.values[i], 1e-8);
  }
}

TEST(Evolve, NormDriftRaisesNumericErrorWithStep) {
  SystemParams p = reference_params();
  p.epsilon_D = kTwoPi * 100e9;
  const Model m(p);
  IntegratorConfig cfg;
  cfg.t_end = 1e-9;
  cfg.dt = 1e-11;
  try {
    evolve(m.basis, m.gamma, p, InitialState::mixed(), cfg);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_GT(e.step(), 0);
  }
}

TEST(ConvergenceProbe, StationaryCaseHasZeroDeviation) {
  SystemParams p = reference_params();
  p.epsilon_D = 0.0;
  const Model m(p);
  IntegratorConfig cfg = short_run(20e-9, 100);
  cfg.convergence_check = true;
  EXPECT_LE(convergence_probe(m.basis, m.gamma, p, InitialState::from_vector(m.basis.state(3)), cfg), 1e-12);
}

TEST(ConvergenceProbe, DefaultStepConverges) {
  const Model m(reference_params());
  IntegratorConfig cfg = short_run(200e-9, 100);
  cfg.convergence_check = true;
  EXPECT_LE(convergence_probe(m.basis, m.gamma, m.params, InitialState::mixed(), cfg), kConvergedDeviation);
}

// The interaction picture keeps even 50 ps accurate to ~1e-7 over 2 us;
// 100 ps is the first step the probe rejects.
TEST(ConvergenceProbe, CoarseStepIsFlagged) {
  const Model m(reference_params());
  IntegratorConfig cfg;
  cfg.convergence_check = true;
  cfg.dt = 100e-12;
  cfg.sample_stride = 1;
  EXPECT_GT(convergence_probe(m.basis, m.gamma, m.params, InitialState::mixed(), cfg), kConvergedDeviation);
}

TEST(ConvergenceProbe, RequiresFlag) {
  const Model m(reference_params());
  EXPECT_THROW(convergence_probe(m.basis, m.gamma, m.params, InitialState::mixed(), short_run(1e-9)), DomainError);
}
