#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "quadtangle/tangle.hpp"

using namespace quadtangle;

namespace {

Vec16 ket(std::initializer_list<std::pair<int, Complex>> terms) {
  Vec16 v = Vec16::Zero();
  for (auto [i, a] : terms) v(i) += a;
  return v / v.norm();
}

const double r2 = std::sqrt(0.5);

}  // namespace

TEST(FourTangle, Ghz) {
  const PureState ghz(ket({{0b0000, r2}, {0b1111, r2}}));
  EXPECT_NEAR(four_tangle(ghz), 1.0, 1e-12);
}

TEST(FourTangle, W) {
  const PureState w(ket({{0b1000, 0.5}, {0b0100, 0.5}, {0b0010, 0.5}, {0b0001, 0.5}}));
  EXPECT_NEAR(four_tangle(w), 0.0, 1e-12);
}

TEST(FourTangle, BellPairTimesGroundIsZero) {
  // Bell pair on L, M; R and C in |0>.
  const PureState s(ket({{0b0000, r2}, {0b1100, r2}}));
  EXPECT_NEAR(four_tangle(s), 0.0, 1e-12);
}

TEST(FourTangle, BellTimesBellIsOne) {
  const PureState s(ket({{0b0000, 0.5}, {0b1100, 0.5}, {0b0011, 0.5}, {0b1111, 0.5}}));
  EXPECT_NEAR(four_tangle(s), 1.0, 1e-12);
}

TEST(FourTangle, ProductStatesVanish) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    Vec16 psi = Vec16::Zero();
    psi(0) = 1.0;
    for (int site = 0; site < 4; ++site) psi = oracle::apply_local(psi, oracle::random_unitary2(rng), site);
    EXPECT_NEAR(four_tangle(PureState(psi)), 0.0, 1e-12);
  }
}

TEST(FourTangle, SubsetSumMatchesCollapsedAndBruteForce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec16 psi = oracle::random_state(rng);
    const PureState s(psi);
    const double t = four_tangle(s);
    EXPECT_NEAR(t, four_tangle_collapsed(s), 1e-12);
    EXPECT_NEAR(t, oracle::brute_force_tangle(psi), 1e-12);
  }
}

TEST(FourTangle, LocalUnitaryInvariance) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec16 psi = oracle::random_state(rng);
    Vec16 phi = psi;
    for (int site = 0; site < 4; ++site) phi = oracle::apply_local(phi, oracle::random_unitary2(rng), site);
    EXPECT_NEAR(four_tangle(PureState(psi)), four_tangle(PureState(phi)), 1e-12);
  }
}

TEST(FourTangle, ComplementarySubsetsHaveEqualConcurrence) {
  std::mt19937_64 rng(17);
  const PureState s(oracle::random_state(rng));
  for (int bits = 1; bits < 15; ++bits) {
    const SubsystemMask m(bits);
    EXPECT_NEAR(concurrence_sq(s, m), concurrence_sq(s, m.complement()), 1e-12);
  }
}

TEST(FourTangle, RandomStatesStayInRange) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 500; ++trial) {
    const double t = four_tangle(PureState(oracle::random_state(rng)));
    EXPECT_GE(t, -1e-12);
    EXPECT_LE(t, 1.0 + 1e-12);
  }
}

TEST(FourTangle, SubsetCounts) {
  EXPECT_EQ(subsets_of_size(1).size(), 4u);
  EXPECT_EQ(subsets_of_size(2).size(), 6u);
  EXPECT_EQ(subsets_of_size(3).size(), 4u);
}

TEST(FourTangle, RejectsUnnormalizedState) {
  Vec16 v = Vec16::Zero();
  v(0) = 1.01;
  EXPECT_THROW(PureState{v}, DomainError);
}

TEST(TangleSeries, MapsEverySample) {
  Trajectory traj;
  for (int i = 0; i < 3; ++i) {
    traj.times.push_back(i * 1e-9);
    traj.c.push_back(Vec16::Zero());
  }
  traj.beta = {ket({{0, 1.0}}), ket({{0b0000, r2}, {0b1111, r2}}), ket({{0b1000, 0.5}, {0b0100, 0.5}, {0b0010, 0.5}, {0b0001, 0.5}})};
  const TangleSeries s = tangle_series(traj);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s.times[1], 1e-9);
  EXPECT_NEAR(s.values[0], 0.0, 1e-12);
  EXPECT_NEAR(s.values[1], 1.0, 1e-12);
  EXPECT_NEAR(s.values[2], 0.0, 1e-12);
  EXPECT_NEAR(s.max(), 1.0, 1e-12);
}

TEST(TangleSeries, ReportsFailingSample) {
  Trajectory traj;
  traj.times = {0.0, 1e-9};
  traj.c = {Vec16::Zero(), Vec16::Zero()};
  Vec16 bad = Vec16::Zero();
  bad(0) = 2.0;
  traj.beta = {ket({{0, 1.0}}), bad};
  try {
    tangle_series(traj);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("sample 1"), std::string::npos);
  }
}

TEST(TangleSeries, ClampOnlyRoundoffNegatives) {
  EXPECT_EQ(clamp_for_report(-5e-10), 0.0);
  EXPECT_EQ(clamp_for_report(-2e-9), -2e-9);
  EXPECT_EQ(clamp_for_report(0.25), 0.25);
}
