// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "slpos/common.hpp"
#include "slpos/propagation.hpp"

namespace slpos {

/// Sidelink OFDM pilot waveform and radio budget (frequency-domain model).
struct OfdmConfig {
  int num_subcarriers = 167;
  double subcarrier_spacing = 120e3;  // Hz
  int num_symbols = 12;
  double symbol_duration = 100.2e-6 / 12.0;  // s, CP included
  double carrier_freq = 5.9e9;               // Hz
  double tx_power = 0.01;                    // W
  double noise_psd = 3.981071705534986e-21;  // W/Hz (-174 dBm/Hz), before the noise figure
  double noise_figure_db = 8.0;

  double wavelength() const { return kSpeedOfLight / carrier_freq; }
  double bandwidth() const { return num_subcarriers * subcarrier_spacing; }
  /// Longest delay representable without phase wrap on the subcarrier grid.
  double max_delay() const { return 1.0 / subcarrier_spacing; }

  void validate() const;
};

using ComplexGrid = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// T x N_s pilot symbols, one OFDM symbol per row.
struct PilotGrid {
  ComplexGrid symbols;
};

struct RxSymbols {
  ComplexGrid symbols;
  double noise_variance_per_sample = 0.0;  // W s per complex sample
};

enum class PilotPhase { AllOnes, SeededRandom };

OfdmConfig default_config();

/// Effective noise PSD N_0 = noise_psd * 10^(NF/10), used as the per-sample
/// complex noise variance of the post-FFT model.
double noise_variance(const OfdmConfig& config);

PilotGrid make_pilots(const OfdmConfig& config, PilotPhase phase_mode = PilotPhase::AllOnes,
                      std::uint64_t seed = 0);

/// Noiseless when noise_seed is empty. Delays (plus clock_bias) enter only
/// through the per-subcarrier phase ramp exp(-j 2 pi n tau df), n = 0..N_s-1.
/// The Doppler term uses the 0-based symbol index.
RxSymbols synthesize_rx(std::span<const PathComponent> paths, const PilotGrid& pilots,
                        const OfdmConfig& config, std::optional<std::uint64_t> noise_seed,
                        bool doppler_enabled, double clock_bias);

RxSymbols synthesize_rx(const ChannelSnapshot& channel, const PilotGrid& pilots,
                        const OfdmConfig& config, std::optional<std::uint64_t> noise_seed,
                        bool doppler_enabled, double clock_bias);

}  // namespace slpos
