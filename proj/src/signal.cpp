// SPDX-License-Identifier: Apache-2.0
#include "slpos/signal.hpp"

#include <cmath>
#include <random>

namespace slpos {

void OfdmConfig::validate() const {
  if (num_subcarriers < 2) throw ConfigError("num_subcarriers must be >= 2");
  if (!(subcarrier_spacing > 0.0)) throw ConfigError("subcarrier_spacing must be > 0");
  if (num_symbols < 1) throw ConfigError("num_symbols must be >= 1");
  // Small slack so 100.2 us / 12 style values are not rejected by rounding.
  if (!(symbol_duration * (1.0 + 1e-12) >= 1.0 / subcarrier_spacing)) {
    throw ConfigError("symbol_duration must be >= 1/subcarrier_spacing");
  }
  if (!(carrier_freq > 0.0) || !(tx_power > 0.0) || !(noise_psd > 0.0)) {
    throw ConfigError("carrier frequency and powers must be positive");
  }
  if (!std::isfinite(noise_figure_db)) throw ConfigError("noise_figure_db must be finite");
}

OfdmConfig default_config() { return OfdmConfig{}; }

double noise_variance(const OfdmConfig& config) {
  return config.noise_psd * db_to_linear(config.noise_figure_db);
}

PilotGrid make_pilots(const OfdmConfig& config, PilotPhase phase_mode, std::uint64_t seed) {
  config.validate();
  const int rows = config.num_symbols;
  const int cols = config.num_subcarriers;
  const double amp = std::sqrt(config.tx_power / (config.subcarrier_spacing * cols));
  PilotGrid grid;
  grid.symbols.resize(rows, cols);
  if (phase_mode == PilotPhase::AllOnes) {
    grid.symbols.setConstant(cd(amp, 0.0));
    return grid;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  for (int t = 0; t < rows; ++t) {
    for (int n = 0; n < cols; ++n) grid.symbols(t, n) = std::polar(amp, phase(rng));
  }
  return grid;
}

RxSymbols synthesize_rx(std::span<const PathComponent> paths, const PilotGrid& pilots,
                        const OfdmConfig& config, std::optional<std::uint64_t> noise_seed,
                        bool doppler_enabled, double clock_bias) {
  config.validate();
  const int rows = config.num_symbols;
  const int cols = config.num_subcarriers;
  if (pilots.symbols.rows() != rows || pilots.symbols.cols() != cols) {
    throw ConfigError("pilot grid dimensions do not match the OFDM config");
  }
  const double df = config.subcarrier_spacing;
  const double lambda = config.wavelength();

  RxSymbols rx;
  rx.symbols = ComplexGrid::Zero(rows, cols);
  rx.noise_variance_per_sample = noise_variance(config);

  Eigen::VectorXcd response(cols);
  for (const auto& p : paths) {
    if (!(p.delay >= 0.0) || p.delay >= config.max_delay()) {
      throw ConfigError("path delay outside [0, 1/subcarrier_spacing)");
    }
    const double tau = p.delay + clock_bias;
    for (int n = 0; n < cols; ++n) {
      response[n] = p.gain * std::polar(1.0, -2.0 * kPi * n * tau * df);
    }
    for (int t = 0; t < rows; ++t) {
      const cd doppler = doppler_enabled
                             ? std::polar(1.0, 2.0 * kPi * t * p.radial_velocity *
                                                   config.symbol_duration / lambda)
                             : cd(1.0, 0.0);
      rx.symbols.row(t).array() += pilots.symbols.row(t).array() * response.transpose().array() * doppler;
    }
  }

  if (noise_seed) {
    std::mt19937_64 rng(*noise_seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(rx.noise_variance_per_sample / 2.0));
    for (int t = 0; t < rows; ++t) {
      for (int n = 0; n < cols; ++n) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        rx.symbols(t, n) += cd(re, im);
      }
    }
  }
  return rx;
}

RxSymbols synthesize_rx(const ChannelSnapshot& channel, const PilotGrid& pilots,
                        const OfdmConfig& config, std::optional<std::uint64_t> noise_seed,
                        bool doppler_enabled, double clock_bias) {
  return synthesize_rx(std::span<const PathComponent>(channel.paths), pilots, config, noise_seed,
                       doppler_enabled, clock_bias);
}

}  // namespace slpos
