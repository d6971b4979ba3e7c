// SPDX-License-Identifier: Apache-2.0
#include <random>

#include <gtest/gtest.h>

#include "slpos/signal.hpp"

namespace slpos {
namespace {

PathComponent path(double delay, cd gain, double v = 0.0) {
  PathComponent p;
  p.delay = delay;
  p.gain = gain;
  p.radial_velocity = v;
  return p;
}

TEST(OfdmConfig, Defaults) {
  const auto c = default_config();
  EXPECT_EQ(c.num_subcarriers, 167);
  EXPECT_DOUBLE_EQ(c.subcarrier_spacing, 120e3);
  EXPECT_EQ(c.num_symbols, 12);
  EXPECT_NEAR(c.symbol_duration, 8.35e-6, 1e-18);
  EXPECT_DOUBLE_EQ(c.carrier_freq, 5.9e9);
  EXPECT_DOUBLE_EQ(c.tx_power, 0.01);
  EXPECT_NEAR(c.wavelength(), 0.05081228101694915, 1e-15);
  EXPECT_NO_THROW(c.validate());
}

TEST(OfdmConfig, InvalidValues) {
  auto c = default_config();
  c.num_subcarriers = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = default_config();
  c.symbol_duration = 1e-6;
  EXPECT_THROW(c.validate(), ConfigError);
  c = default_config();
  c.tx_power = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(NoiseVariance, DbConversions) {
  const auto c = default_config();
  EXPECT_NEAR(noise_variance(c), 2.5118864315095883e-20, 1e-32);
  auto nf0 = c;
  nf0.noise_figure_db = 0.0;
  EXPECT_DOUBLE_EQ(noise_variance(nf0), c.noise_psd);
  auto nf3 = nf0;
  nf3.noise_figure_db = 3.0;
  EXPECT_NEAR(noise_variance(nf3) / noise_variance(nf0), 1.9952623149688795, 1e-14);
}

TEST(Pilots, AllOnesEnergy) {
  const auto c = default_config();
  const auto g = make_pilots(c, PilotPhase::AllOnes);
  ASSERT_EQ(g.symbols.rows(), 12);
  ASSERT_EQ(g.symbols.cols(), 167);
  EXPECT_NEAR(std::norm(g.symbols(3, 7)), 4.99001996007984e-10, 1e-22);
  for (int t = 0; t < 12; ++t) {
    EXPECT_NEAR(g.symbols.row(t).squaredNorm(), 8.333333333333334e-08, 1e-12 * 8.33e-8);
  }
}

TEST(Pilots, SeededPhaseConstantModulusAndDeterministic) {
  const auto c = default_config();
  const auto a = make_pilots(c, PilotPhase::SeededRandom, 99);
  const auto b = make_pilots(c, PilotPhase::SeededRandom, 99);
  const auto other = make_pilots(c, PilotPhase::SeededRandom, 100);
  EXPECT_EQ(a.symbols, b.symbols);
  EXPECT_NE(a.symbols, other.symbols);
  const double mag = std::abs(a.symbols(0, 0));
  EXPECT_TRUE(((a.symbols.cwiseAbs().array() - mag).abs() < 1e-15).all());
  for (int t = 0; t < 12; ++t) {
    EXPECT_NEAR(a.symbols.row(t).squaredNorm(), c.tx_power / c.subcarrier_spacing, 1e-12 * 8.33e-8);
  }
}

TEST(Synthesis, IdentityChannel) {
  const auto c = default_config();
  const auto pilots = make_pilots(c);
  const std::vector<PathComponent> one{path(0.0, 1.0)};
  const auto rx = synthesize_rx(one, pilots, c, std::nullopt, false, 0.0);
  EXPECT_EQ(rx.symbols, pilots.symbols);
}

TEST(Synthesis, EmptyChannelNoNoiseIsZero) {
  const auto c = default_config();
  const auto rx = synthesize_rx(std::vector<PathComponent>{}, make_pilots(c), c, std::nullopt, true, 0.0);
  EXPECT_TRUE(rx.symbols.isZero(0.0));
}

TEST(Synthesis, DopplerPhaseAdvance) {
  const auto c = default_config();
  const std::vector<PathComponent> one{path(0.0, 1.0, 14.0)};
  const auto rx = synthesize_rx(one, make_pilots(c), c, std::nullopt, true, 0.0);
  const double step = std::arg(rx.symbols(1, 0) / rx.symbols(0, 0));
  EXPECT_NEAR(step, 0.014455252700902945, 1e-12);
  const double step_late = std::arg(rx.symbols(11, 5) / rx.symbols(10, 5));
  EXPECT_NEAR(step_late, step, 1e-12);
}

TEST(Synthesis, DelayBeyondGridRejected) {
  const auto c = default_config();
  const std::vector<PathComponent> far{path(1.0 / c.subcarrier_spacing, 1.0)};
  EXPECT_THROW(synthesize_rx(far, make_pilots(c), c, std::nullopt, false, 0.0), ConfigError);
}

TEST(Synthesis, LinearityOverDisjointPaths) {
  const auto c = default_config();
  const auto pilots = make_pilots(c, PilotPhase::SeededRandom, 5);
  const std::vector<PathComponent> a{path(50e-9, cd(0.3, -0.2), 3.0), path(90e-9, cd(-0.1, 0.4), -2.0)};
  const std::vector<PathComponent> b{path(120e-9, cd(0.05, 0.2), 7.0)};
  std::vector<PathComponent> both = a;
  both.insert(both.end(), b.begin(), b.end());
  const auto ya = synthesize_rx(a, pilots, c, std::nullopt, true, 0.0);
  const auto yb = synthesize_rx(b, pilots, c, std::nullopt, true, 0.0);
  const auto yab = synthesize_rx(both, pilots, c, std::nullopt, true, 0.0);
  EXPECT_LT((yab.symbols - ya.symbols - yb.symbols).norm(), 1e-12 * yab.symbols.norm());
}

TEST(Synthesis, ClockBiasEqualsDelayShift) {
  const auto c = default_config();
  const auto pilots = make_pilots(c);
  const double bias = 0.37e-6;
  std::vector<PathComponent> paths{path(40e-9, cd(1, 0)), path(75e-9, cd(-0.2, 0.3))};
  const auto with_bias = synthesize_rx(paths, pilots, c, std::nullopt, false, bias);
  for (auto& p : paths) p.delay += bias;
  const auto shifted = synthesize_rx(paths, pilots, c, std::nullopt, false, 0.0);
  EXPECT_LT((with_bias.symbols - shifted.symbols).norm(), 1e-12 * shifted.symbols.norm());
}

TEST(Synthesis, SinglePathEnergy) {
  const auto c = default_config();
  const cd alpha(3e-4, -1e-4);
  const std::vector<PathComponent> one{path(200e-9, alpha, 5.0)};
  const auto rx = synthesize_rx(one, make_pilots(c, PilotPhase::SeededRandom, 1), c, std::nullopt, true, 0.0);
  const double expected = std::norm(alpha) * c.num_symbols * c.tx_power / c.subcarrier_spacing;
  EXPECT_NEAR(rx.symbols.squaredNorm(), expected, 1e-10 * expected);
}

TEST(Synthesis, NoisePowerMatchesVariance) {
  auto c = default_config();
  c.num_symbols = 600;  // 600 * 167 > 1e5 samples
  const auto rx = synthesize_rx(std::vector<PathComponent>{}, make_pilots(c), c, 2024u, false, 0.0);
  const double mean_power = rx.symbols.squaredNorm() / static_cast<double>(rx.symbols.size());
  EXPECT_NEAR(mean_power / noise_variance(c), 1.0, 0.02);
  EXPECT_DOUBLE_EQ(rx.noise_variance_per_sample, noise_variance(c));
  // Same seed, same noise.
  const auto again = synthesize_rx(std::vector<PathComponent>{}, make_pilots(c), c, 2024u, false, 0.0);
  EXPECT_EQ(rx.symbols, again.symbols);
}

}  // namespace
}  // namespace slpos
