// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "slpos/signal.hpp"

namespace slpos {

enum class WindowKind { Hamming, Rectangular };

/// Symmetric Hamming window, w[k] = 0.54 - 0.46 cos(2 pi k / (n - 1)).
std::vector<double> hamming_window(int n);
std::vector<double> make_window(WindowKind kind, int n);

/// Oversampled delay-power profile |IDFT_K(sum_t w .* y_t ./ s_t)|^2.
struct DelaySpectrum {
  std::vector<double> power;   // length K = oversample * N_s
  double bin_spacing = 0.0;    // s, 1 / (K df)
  std::vector<double> window;  // length N_s

  double period() const { return bin_spacing * static_cast<double>(power.size()); }
};

struct PeakPolicy {
  enum class Kind { GlobalPeak, FirstPeak };
  Kind kind = Kind::GlobalPeak;
  double threshold_db = 6.0;  // FirstPeak: accept local maxima within this of the global max

  static PeakPolicy global() { return {}; }
  static PeakPolicy first(double threshold_db) { return {Kind::FirstPeak, threshold_db}; }
};

struct ToaEstimate {
  double toa = 0.0;  // s, in [0, 1/df)
  double peak_power = 0.0;
  std::size_t peak_index = 0;
  bool interpolated = false;
  /// Peak less than 10 dB above the median bin.
  bool low_confidence = false;
};

struct RangeMeasurement {
  double distance = 0.0;          // m
  double sigma = 1.0;             // m
  double clock_bias_model = 0.0;  // s, bias implied by the forward/reverse asymmetry
};

DelaySpectrum delay_spectrum(const RxSymbols& rx, const PilotGrid& pilots,
                             const OfdmConfig& config, std::span<const double> window,
                             int oversample = 16);

ToaEstimate estimate_toa(const DelaySpectrum& spectrum, const PeakPolicy& policy = {});

/// Round-trip range c (toa_fwd + toa_rev - processing_time) / 2. The clock bias
/// enters the two one-way delays with opposite signs and cancels. When
/// `ambiguity_period` > 0 the round trip is reduced modulo that period first,
/// which undoes the wrap of one-way estimates taken from a periodic spectrum.
/// sigma = sqrt(2 * one_way_variance), with one_way_variance in m^2 being the
/// variance contributed by each link to the combined distance.
RangeMeasurement rtt_range(double toa_fwd, double toa_rev, double processing_time,
                           double one_way_variance, double ambiguity_period = 0.0);

}  // namespace slpos
