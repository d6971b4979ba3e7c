// SPDX-License-Identifier: Apache-2.0
#include "slpos/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <fftw3.h>

namespace slpos {

namespace {

// FFTW planning is not thread safe; executing an existing plan on new arrays is.
class BackwardPlanCache {
 public:
  fftw_plan get(int size) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(size);
    if (it != plans_.end()) return it->second.get();
    auto* in = fftw_alloc_complex(static_cast<std::size_t>(size));
    auto* out = fftw_alloc_complex(static_cast<std::size_t>(size));
    fftw_plan plan =
        fftw_plan_dft_1d(size, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(size, PlanPtr(plan));
    return plan;
  }

 private:
  struct PlanDeleter {
    void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
  };
  using PlanPtr = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

  std::mutex mutex_;
  std::map<int, PlanPtr> plans_;
};

BackwardPlanCache& plan_cache() {
  static BackwardPlanCache cache;
  return cache;
}

}  // namespace

std::vector<double> hamming_window(int n) {
  if (n < 2) throw ConfigError("hamming_window: n must be >= 2");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    w[static_cast<std::size_t>(k)] = 0.54 - 0.46 * std::cos(2.0 * kPi * k / (n - 1));
  }
  return w;
}

std::vector<double> make_window(WindowKind kind, int n) {
  if (kind == WindowKind::Hamming) return hamming_window(n);
  if (n < 1) throw ConfigError("make_window: n must be >= 1");
  return std::vector<double>(static_cast<std::size_t>(n), 1.0);
}

DelaySpectrum delay_spectrum(const RxSymbols& rx, const PilotGrid& pilots,
                             const OfdmConfig& config, std::span<const double> window,
                             int oversample) {
  const int ns = config.num_subcarriers;
  const int nt = config.num_symbols;
  if (oversample < 1) throw ConfigError("delay_spectrum: oversample must be >= 1");
  if (static_cast<int>(window.size()) != ns) throw ConfigError("delay_spectrum: window length mismatch");
  if (rx.symbols.rows() != nt || rx.symbols.cols() != ns || pilots.symbols.rows() != nt ||
      pilots.symbols.cols() != ns) {
    throw ConfigError("delay_spectrum: grid dimensions do not match the OFDM config");
  }
  if ((pilots.symbols.array() == cd(0.0, 0.0)).any()) {
    throw ConfigError("delay_spectrum: zero pilot entry");
  }

  const int K = oversample * ns;
  std::vector<cd> buffer(static_cast<std::size_t>(K), cd(0.0, 0.0));
  for (int t = 0; t < nt; ++t) {
    for (int n = 0; n < ns; ++n) {
      buffer[static_cast<std::size_t>(n)] += window[static_cast<std::size_t>(n)] *
                                             (rx.symbols(t, n) / pilots.symbols(t, n));
    }
  }
  std::vector<cd> out(static_cast<std::size_t>(K));
  fftw_execute_dft(plan_cache().get(K), reinterpret_cast<fftw_complex*>(buffer.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));

  DelaySpectrum spec;
  spec.power.resize(static_cast<std::size_t>(K));
  const double norm = 1.0 / static_cast<double>(K);  // |1/sqrt(K)|^2
  for (std::size_t k = 0; k < out.size(); ++k) spec.power[k] = std::norm(out[k]) * norm;
  spec.bin_spacing = 1.0 / (static_cast<double>(K) * config.subcarrier_spacing);
  spec.window.assign(window.begin(), window.end());
  return spec;
}

ToaEstimate estimate_toa(const DelaySpectrum& spectrum, const PeakPolicy& policy) {
  const auto& z = spectrum.power;
  const std::size_t K = z.size();
  if (K < 3) throw ConfigError("estimate_toa: spectrum too short");
  const auto max_it = std::max_element(z.begin(), z.end());
  const double zmax = *max_it;
  if (!(zmax > 0.0)) throw ConfigError("estimate_toa: all-zero spectrum");

  auto at = [&](std::ptrdiff_t k) {
    const auto m = static_cast<std::ptrdiff_t>(K);
    return z[static_cast<std::size_t>(((k % m) + m) % m)];
  };

  std::size_t peak = static_cast<std::size_t>(max_it - z.begin());
  if (policy.kind == PeakPolicy::Kind::FirstPeak) {
    const double floor = zmax * std::pow(10.0, -std::abs(policy.threshold_db) / 10.0);
    for (std::size_t k = 0; k < K; ++k) {
      const auto ks = static_cast<std::ptrdiff_t>(k);
      if (z[k] >= floor && z[k] >= at(ks - 1) && z[k] >= at(ks + 1)) {
        peak = k;
        break;
      }
    }
  }

  ToaEstimate est;
  est.peak_index = peak;
  est.peak_power = z[peak];
  double offset = 0.0;
  const auto ks = static_cast<std::ptrdiff_t>(peak);
  const double zl = at(ks - 1);
  const double zr = at(ks + 1);
  if (zl > 0.0 && zr > 0.0) {
    const double a = std::log(zl);
    const double b = std::log(z[peak]);
    const double c = std::log(zr);
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) {
      offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
      est.interpolated = true;
    }
  }
  const double period = spectrum.period();
  double toa = (static_cast<double>(peak) + offset) * spectrum.bin_spacing;
  toa = std::fmod(toa, period);
  if (toa < 0.0) toa += period;
  est.toa = toa;

  std::vector<double> sorted(z);
  auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(K / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  est.low_confidence = !(zmax > 10.0 * *mid);
  return est;
}

RangeMeasurement rtt_range(double toa_fwd, double toa_rev, double processing_time,
                           double one_way_variance, double ambiguity_period) {
  if (!(one_way_variance > 0.0)) throw ConfigError("rtt_range: one-way variance must be > 0");
  double round_trip = toa_fwd + toa_rev - processing_time;
  if (ambiguity_period > 0.0) {
    round_trip = std::fmod(round_trip, ambiguity_period);
    if (round_trip < 0.0) round_trip += ambiguity_period;
  }
  if (round_trip < 0.0) throw ConfigError("rtt_range: negative round-trip time");
  RangeMeasurement m;
  m.distance = 0.5 * kSpeedOfLight * round_trip;
  m.sigma = std::sqrt(2.0 * one_way_variance);
  m.clock_bias_model = 0.5 * (toa_fwd - (toa_rev - processing_time));
  return m;
}

}  // namespace slpos
