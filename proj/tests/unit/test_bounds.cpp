// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "slpos/bounds.hpp"
#include "fd_oracle.hpp"

namespace slpos {
namespace {

PathComponent path(double delay, cd gain, PathKind kind = PathKind::Wall) {
  PathComponent p;
  p.delay = delay;
  p.gain = gain;
  p.kind = kind;
  return p;
}

ChannelSnapshot channel(std::vector<PathComponent> paths) {
  ChannelSnapshot c;
  if (!paths.empty()) paths.front().kind = PathKind::LoS;
  c.paths = std::move(paths);
  return c;
}

double rel_frob(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); }

TEST(Fim, SinglePathMatchesFiniteDifferences) {
  const auto c = default_config();
  const auto pilots = make_pilots(c);
  const std::vector<PathComponent> one{path(235e-9, cd(4e-5, -2e-5))};
  const auto J = fim(one, pilots, c);
  ASSERT_EQ(J.rows(), 3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(testing_oracle::equilibrate(J));
  EXPECT_GT(eig.eigenvalues().minCoeff(), 1e-6);  // rank 3
  const auto Jfd = testing_oracle::finite_difference_fim(one, pilots, c);
  EXPECT_LT(rel_frob(J, Jfd), 1e-6);
  EXPECT_LT(rel_frob(testing_oracle::equilibrate(J, J), testing_oracle::equilibrate(Jfd, J)), 1e-6);
}

TEST(Fim, DuplicatePathsAreSingular) {
  const auto c = default_config();
  const auto p = path(100e-9, cd(1e-4, 0));
  const std::vector<PathComponent> dup{p, p};
  const auto J = fim(dup, make_pilots(c), c);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(testing_oracle::equilibrate(J));
  const auto& ev = eig.eigenvalues();
  // Both copies share every derivative direction: rank 3 out of 6.
  for (int k = 0; k < 3; ++k) EXPECT_LT(std::abs(ev[k]), 1e-9 * ev.maxCoeff());
  EXPECT_GT(ev[3], 1e-6 * ev.maxCoeff());
  EXPECT_TRUE(std::isinf(crb_delay(J)));
}

TEST(Fim, NoiseScaling) {
  auto c = default_config();
  const auto pilots = make_pilots(c);
  const std::vector<PathComponent> two{path(100e-9, cd(1e-4, 0)), path(180e-9, cd(0, 5e-5))};
  const auto J = fim(two, pilots, c);
  c.noise_psd *= 10.0;
  const auto J10 = fim(two, pilots, c);
  EXPECT_LT(rel_frob(J10 * 10.0, J), 1e-14);
}

TEST(Fim, SymmetricPsdOnRandomChannels) {
  const auto c = default_config();
  const auto pilots = make_pilots(c, PilotPhase::SeededRandom, 3);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto paths = testing_oracle::random_paths(rng, 1 + i % 4);
    const auto J = fim(paths, pilots, c);
    EXPECT_LT((J - J.transpose()).norm(), 1e-9 * J.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9 * J.norm());
  }
}

TEST(Fim, EmptyPathListThrows) {
  const auto c = default_config();
  EXPECT_THROW(fim(std::vector<PathComponent>{}, make_pilots(c), c), ConfigError);
}

TEST(Fim, RandomConfigurationsMatchOracle) {
  const auto c = default_config();
  const auto pilots = make_pilots(c);
  std::mt19937_64 rng(2718);
  for (int i = 0; i < 100; ++i) {
    const auto paths = testing_oracle::random_paths(rng, 1 + i % 4);
    const auto J = fim(paths, pilots, c);
    const auto Jfd = testing_oracle::finite_difference_fim(paths, pilots, c);
    EXPECT_LT(rel_frob(J, Jfd), 1e-5) << "config " << i;
  }
}

TEST(Crb, DiagonalInverse) {
  Eigen::MatrixXd J = Eigen::Vector3d(4.0e18, 2.5e9, 7.0e9).asDiagonal();
  EXPECT_DOUBLE_EQ(crb_delay(J), 1.0 / 4.0e18);
}

TEST(Crb, ZeroInformationIsInfinite) {
  Eigen::MatrixXd J = Eigen::Vector3d(0.0, 1.0, 1.0).asDiagonal();
  EXPECT_TRUE(std::isinf(crb_delay(J)));
}

TEST(Crb, MatchesDenseInverseOnCoupledMatrix) {
  Eigen::MatrixXd J(3, 3);
  J << 4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0;
  EXPECT_NEAR(crb_delay(J), J.inverse()(0, 0), 1e-15);
}

TEST(Crb, CutoffIsConfigurable) {
  Eigen::MatrixXd J(2, 2);
  J << 1.0, 1.0 - 1e-9, 1.0 - 1e-9, 1.0;  // condition ~ 2e9
  EXPECT_TRUE(std::isfinite(crb_delay(J, 1e12)));
  EXPECT_TRUE(std::isinf(crb_delay(J, 1e8)));
}

TEST(LosOnlyReb, FarAndNearRsu) {
  const auto c = default_config();
  const auto pilots = make_pilots(c);
  const auto far = channel({path(70.5 / kSpeedOfLight, friis_gain(70.5, c.wavelength()))});
  const double reb_far = reb_los_only(far, pilots, c);
  EXPECT_NEAR(reb_far, 0.01611598366643781, 1e-9);  // numpy oracle
  EXPECT_NEAR(reb_far, 0.01604, 0.15 * 0.01604);   // figure value
  const auto near = channel({path(8.649277426467485 / kSpeedOfLight, friis_gain(8.649277426467485, c.wavelength()))});
  const double reb_near = reb_los_only(near, pilots, c);
  EXPECT_NEAR(reb_near, 0.0019771860103750256, 1e-10);
  EXPECT_NEAR(reb_near, 0.00203, 0.15 * 0.00203);
}

TEST(LosOnlyReb, MatchesClosedFormCentredIndexSum) {
  // Single path with unknown gain: J_eff = (2/N0) |a|^2 (2 pi df)^2 sum_t,n |s|^2 (n - nbar)^2
  const auto c = default_config();
  const auto pilots = make_pilots(c);
  const cd a(2e-5, 3e-5);
  const auto ch = channel({path(300e-9, a)});
  const double ns = c.num_subcarriers;
  const double centred = ns * (ns * ns - 1.0) / 12.0;
  const double j = 2.0 / noise_variance(c) * std::norm(a) * std::pow(2 * kPi * c.subcarrier_spacing, 2) *
                   c.num_symbols * (c.tx_power / (c.subcarrier_spacing * ns)) * centred;
  EXPECT_NEAR(reb_los_only(ch, pilots, c), kSpeedOfLight / std::sqrt(j), 1e-9 * kSpeedOfLight / std::sqrt(j));
}

TEST(LosOnlyReb, DoublingGainHalvesBound) {
  const auto c = default_config();
  const auto pilots = make_pilots(c);
  const double r1 = reb_los_only(channel({path(50e-9, cd(1e-4, 2e-5))}), pilots, c);
  const double r2 = reb_los_only(channel({path(50e-9, cd(2e-4, 4e-5))}), pilots, c);
  EXPECT_NEAR(r1 / r2, 2.0, 1e-12);
}

TEST(LosOnlyReb, RequiresLos) {
  const auto c = default_config();
  ChannelSnapshot nlos;
  nlos.paths.push_back(path(50e-9, 1e-4, PathKind::Wall));
  EXPECT_THROW(reb_los_only(nlos, make_pilots(c), c), ConfigError);
  EXPECT_THROW(reb_waa(nlos, make_pilots(c), c), ConfigError);
  EXPECT_THROW(resolution_cell(nlos, 1.5, c), ConfigError);
}

TEST(ResolutionCell, WidthAndMembership) {
  const auto c = default_config();
  const double half = 1.5 / (c.num_subcarriers * c.subcarrier_spacing);
  EXPECT_NEAR(half, 74.85e-9, 1e-11);
  EXPECT_NEAR(half * kSpeedOfLight, 22.44, 0.01);
  const double t0 = 30e-9;
  const auto far = channel({path(t0, 1e-4), path(t0 + 30.0 / kSpeedOfLight, 1e-4), path(t0 + 60.0 / kSpeedOfLight, 1e-4)});
  EXPECT_EQ(resolution_cell(far, 1.5, c), std::vector<std::size_t>{0});
  const auto ground = channel({path(t0, 1e-4), path(t0 + 2.96 / kSpeedOfLight, 5e-5), path(t0 + 30.0 / kSpeedOfLight, 1e-4)});
  EXPECT_EQ(resolution_cell(ground, 1.5, c), (std::vector<std::size_t>{0, 1}));
  EXPECT_THROW(resolution_cell(ground, 2.0, c), ConfigError);
  EXPECT_THROW(resolution_cell(ground, 1.0, c), ConfigError);
}

TEST(AllPathsReb, SingletonCellEqualsLosOnly) {
  const auto c = default_config();
  const auto pilots = make_pilots(c);
  const auto ch = channel({path(30e-9, cd(1e-4, 1e-5)), path(30e-9 + 40.0 / kSpeedOfLight, cd(5e-5, 0))});
  EXPECT_EQ(reb_all_paths(ch, pilots, c), reb_los_only(ch, pilots, c));
}

TEST(AllPathsReb, CoincidentPathsGiveInfinity) {
  const auto c = default_config();
  const auto ch = channel({path(30e-9, cd(1e-4, 0)), path(30e-9, cd(5e-5, 2e-5))});
  EXPECT_TRUE(std::isinf(reb_all_paths(ch, make_pilots(c), c)));
}

TEST(AllPathsReb, LosPlusGroundBounce) {
  const auto c = default_config();
  const auto pilots = make_pilots(c);
  const double d0 = 8.649277426467485;
  const double d1 = 11.610770861575041;
  const auto ch = channel({path(d0 / kSpeedOfLight, friis_gain(d0, c.wavelength())),
                          path(d1 / kSpeedOfLight, -0.5 * friis_gain(d1, c.wavelength()), PathKind::Ground)});
  const double all = reb_all_paths(ch, pilots, c);
  EXPECT_GE(all, reb_los_only(ch, pilots, c));
  EXPECT_NEAR(all, 0.01798000054208333, 1e-5 * 0.01798);  // numpy brute-force FIM
  const auto Jfd = testing_oracle::finite_difference_fim(ch.paths, pilots, c);
  EXPECT_NEAR(all, kSpeedOfLight * std::sqrt(Jfd.inverse()(0, 0)), 1e-5 * all);
}

TEST(Waa, SinglePathRevertsToLosOnly) {
  const auto c = default_config();
  const auto pilots = make_pilots(c);
  const auto rep = reb_waa(channel({path(123e-9, cd(-3e-5, 7e-5))}), pilots, c);
  EXPECT_EQ(rep.weights, std::vector<double>{1.0});
  EXPECT_EQ(rep.waa_bias, 0.0);
  EXPECT_EQ(rep.reb_waa, rep.reb_los_only);
  EXPECT_EQ(rep.reb_all_paths, rep.reb_los_only);
  EXPECT_FALSE(rep.destructive_interference);
}

TEST(Waa, HandComputedTwoPathCase) {
  const auto c = default_config();
  const auto pilots = make_pilots(c);
  const double t0 = 50e-9;
  const auto rep = reb_waa(channel({path(t0, 1.0), path(t0 + 10e-9, 0.5)}), pilots, c);
  ASSERT_EQ(rep.cell_indices.size(), 2u);
  EXPECT_NEAR(rep.weights[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(rep.weights[1], 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(rep.merged_toa - t0, 3.3333333333e-9, 1e-18);
  EXPECT_NEAR(rep.waa_bias, 0.9993081933333333, 1e-9);
  EXPECT_NEAR(std::abs(rep.merged_gain - cd(1.5, 0.0)), 0.0, 1e-15);
  EXPECT_GE(rep.reb_waa, rep.waa_bias);
  EXPECT_DOUBLE_EQ(rep.beta, 1.5);
}

TEST(Waa, ScenarioCentreGroundBounceBias) {
  const auto c = default_config();
  const auto cfg = build_scenario(1);
  const auto snap = trace_paths(*cfg.rsu, Pose{Vec3(1.6, 0, 1.5)}, cfg);
  const auto rep = reb_waa(snap, make_pilots(c), c);
  EXPECT_NEAR(rep.weights[1], 0.2714, 1e-4);
  EXPECT_NEAR(rep.waa_bias, 0.8037063056540501, 1e-9);
  EXPECT_NEAR(rep.reb_waa, 0.8037081877308146, 1e-8);
  EXPECT_GE(rep.reb_waa / rep.reb_los_only, 10.0);
}

TEST(Waa, DestructiveMergeFlagged) {
  const auto c = default_config();
  const auto rep = reb_waa(channel({path(50e-9, cd(1e-4, 0)), path(55e-9, cd(-1e-4, 0))}), make_pilots(c), c);
  EXPECT_TRUE(rep.destructive_interference);
  EXPECT_TRUE(std::isinf(rep.reb_waa));
}

class WaaProperties : public ::testing::Test {
 protected:
  OfdmConfig c = default_config();
  PilotGrid pilots = make_pilots(c);
  std::mt19937_64 rng{77};

  ChannelSnapshot random_cell_channel(int extra) {
    std::uniform_real_distribution<double> t0(20e-9, 400e-9);
    std::uniform_real_distribution<double> excess(1e-9, 70e-9);
    std::uniform_real_distribution<double> mag(1e-6, 1e-4);
    std::uniform_real_distribution<double> ph(0.0, 2 * kPi);
    std::vector<PathComponent> ps{path(t0(rng), std::polar(mag(rng), ph(rng)))};
    for (int k = 0; k < extra; ++k) ps.push_back(path(ps[0].delay + excess(rng), std::polar(mag(rng), ph(rng))));
    std::sort(ps.begin() + 1, ps.end(), [](const auto& a, const auto& b) { return a.delay < b.delay; });
    return channel(ps);
  }
};

TEST_F(WaaProperties, WeightsNormalized) {
  for (int i = 0; i < 100; ++i) {
    const auto rep = reb_waa(random_cell_channel(i % 4), pilots, c);
    double sum = 0.0;
    for (double w : rep.weights) {
      EXPECT_GT(w, 0.0);
      EXPECT_LE(w, 1.0);
      sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(rep.cell_indices.front(), 0u);
    EXPECT_GE(rep.reb_waa, rep.waa_bias);
  }
}

TEST_F(WaaProperties, InformationOrdering) {
  int finite = 0;
  for (int i = 0; i < 300; ++i) {
    const auto ch = random_cell_channel(1 + i % 3);
    const double all = reb_all_paths(ch, pilots, c);
    if (!std::isfinite(all)) continue;
    ++finite;
    EXPECT_GE(all, reb_los_only(ch, pilots, c));
  }
  EXPECT_GT(finite, 100);
}

TEST_F(WaaProperties, ScaleEquivariance) {
  for (int i = 0; i < 50; ++i) {
    auto ch = random_cell_channel(1 + i % 3);
    const auto base = reb_waa(ch, pilots, c);
    const double k = 3.0;
    for (auto& p : ch.paths) p.gain *= k;
    const auto scaled = reb_waa(ch, pilots, c);
    EXPECT_NEAR(scaled.merged_toa, base.merged_toa, 1e-21);
    EXPECT_NEAR(scaled.waa_bias, base.waa_bias, 1e-12);
    if (base.destructive_interference) continue;
    const double bias_s = base.waa_bias / kSpeedOfLight;
    const double var_base = std::pow(base.reb_waa / kSpeedOfLight, 2) - bias_s * bias_s;
    const double var_scaled = std::pow(scaled.reb_waa / kSpeedOfLight, 2) - bias_s * bias_s;
    if (var_base > 1e-6 * bias_s * bias_s) EXPECT_NEAR(var_scaled * k * k / var_base, 1.0, 1e-5);
  }
}

TEST_F(WaaProperties, BiasGrowsLinearlyWithEchoDelay) {
  const double t0 = 100e-9;
  double prev = 0.0;
  for (int step = 1; step <= 6; ++step) {
    const double dt = step * 10e-9;
    const auto rep = reb_waa(channel({path(t0, 1e-4), path(t0 + dt, 5e-5)}), pilots, c);
    EXPECT_NEAR(rep.waa_bias, kSpeedOfLight * dt / 3.0, 1e-9);
    EXPECT_GT(rep.waa_bias, prev);
    prev = rep.waa_bias;
  }
}

}  // namespace
}  // namespace slpos
