// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * @file harness.hpp
 * @brief Trajectory sweeps with Monte Carlo RTT ranging, bound curves,
 * positioning demo, requirement-set scoring and CSV export.
 *
 * CSV column order is fixed:
 *   sweep_coord_m, true_range_m, rmse_m, reb_los_m, reb_all_m, reb_waa_m,
 *   waa_bias_m, n_paths, n_cell_paths, los_present
 * Floats use 9 significant digits; infinities are written as `inf` and
 * undefined values (blocked LoS, bound-only runs) as `nan`.
 */

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slpos/bounds.hpp"
#include "slpos/estimation.hpp"
#include "slpos/positioning.hpp"
#include "slpos/propagation.hpp"
#include "slpos/signal.hpp"

namespace slpos {

enum class Link { RsuVehicle, RsuBicycle, VehicleBicycle };

Link parse_link(std::string_view text);
std::string to_string(Link link);

struct RunConfig {
  ScenarioConfig scenario = build_scenario(1);
  OfdmConfig ofdm = default_config();
  Link link = Link::RsuVehicle;
  int trials = 100;
  std::uint64_t seed = 42;
  BoundOptions bounds;
  int oversample = 16;
  WindowKind window = WindowKind::Hamming;
  PeakPolicy peak_policy;
  PilotPhase pilot_phase = PilotPhase::AllOnes;
  bool doppler_enabled = true;
  double clock_bias_std = 1e-6;  // s, fresh zero-mean Gaussian draw per exchange
  double processing_time = 0.0;  // s, known responder turnaround
  /// Worker threads; 0 picks the hardware concurrency. Output does not depend on it.
  int workers = 1;

  void validate() const;
};

struct CurvePoint {
  double sweep_coord = 0.0;  // m, vehicle y or bicycle x
  double true_range = 0.0;   // m
  double rmse = 0.0;         // m, nan when no Monte Carlo was run
  double reb_los = 0.0;      // m, nan when LoS is blocked
  double reb_all = 0.0;      // m, may be inf
  double reb_waa = 0.0;      // m
  double waa_bias = 0.0;     // m
  int n_paths = 0;
  int n_cell_paths = 0;
  bool los_present = false;
  // Not part of the CSV schema.
  double mean_error = 0.0;  // m
  int low_confidence_trials = 0;
};

/// Monte Carlo RTT ranging along the link's trajectory plus the three
/// per-link REBs at every sample.
std::vector<CurvePoint> run_ranging_sweep(const RunConfig& cfg);

/// Bounds only, no Monte Carlo (rmse = nan).
std::vector<CurvePoint> run_bound_sweep(const RunConfig& cfg);

/// Trial-0 forward-link delay spectra for every sweep sample (debug export).
/// Columns: sweep_coord_m, bin, delay_s, power.
void export_spectra_csv(const RunConfig& cfg, const std::string& path);

struct RequirementSet {
  std::string_view name;
  double accuracy_lo;    // m
  double accuracy_hi;    // m
  double confidence_lo;  // fraction
  double confidence_hi;  // fraction
};

inline constexpr std::array<RequirementSet, 3> kRequirementSets{{
    {"set1_low", 10.0, 50.0, 0.68, 0.95},
    {"set2_moderate", 1.0, 3.0, 0.95, 0.99},
    {"set3_high", 0.1, 0.5, 0.95, 0.99},
}};

struct RequirementResult {
  RequirementSet set;
  /// Share of trials with error <= accuracy_hi, and whether it reaches confidence_lo.
  double fraction_relaxed = 0.0;
  bool meets_relaxed = false;
  /// Share of trials with error <= accuracy_lo, and whether it reaches confidence_hi.
  double fraction_strict = 0.0;
  bool meets_strict = false;
  /// Nearest-rank error percentile at confidence_lo.
  double error_percentile = 0.0;
};

struct PositioningSummary {
  double rmse = 0.0;
  double crb = 0.0;
  int trials = 0;
  int converged = 0;
  std::vector<RequirementResult> requirements;
};

PositioningSummary run_positioning_demo(std::span<const Anchor> anchors, const Vec3& true_point,
                                        double sigma, int trials, std::uint64_t seed,
                                        const SolveOptions& options = {});

/// Scores a set of absolute errors against every requirement set.
std::vector<RequirementResult> score_requirements(std::span<const double> errors);

struct CoherenceReport {
  bool unbounded = false;  // v_max == 0
  double coherence_symbols = 0.0;  // lambda df / v_max
  int num_symbols = 0;
  double margin = 0.0;          // coherence_symbols / T
  double latency_budget = 0.0;  // s, 0.1 accuracy / v_max
};

CoherenceReport coherence_and_latency_check(const OfdmConfig& config, double v_max,
                                            double accuracy_req);

void write_csv(std::ostream& out, std::span<const CurvePoint> points);
std::vector<CurvePoint> read_csv(std::istream& in);
void export_csv(std::span<const CurvePoint> points, const std::string& path);

/// Deterministic 64-bit stream seed for (seed, sample, trial, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t sample, std::uint64_t trial,
                          std::uint64_t stream);

}  // namespace slpos
