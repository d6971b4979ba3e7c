// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * @file bounds.hpp
 * @brief Fisher information for the multipath OFDM pilot model and the three
 * range-error bounds derived from it.
 *
 * Paths are parameterized by (delay, Re gain, Im gain), three real entries per
 * path in path order, so the delay of the first path sits at index 0. Doppler
 * phases are treated as known and do not enter the information matrix.
 *
 * - LoS-only: FIM of the LoS path alone (NLoS parameters assumed known).
 * - All-paths: FIM over every path inside the LoS resolution cell
 *   |tau_l - tau_0| <= beta / (N_s df). May be infinite when the cell paths
 *   are not separable.
 * - Weighted-average approximation (WAA): the in-cell paths are merged into one
 *   effective path with amplitude-weighted delay and summed complex gain; the
 *   bound is the effective-path delay CRB plus the squared merge bias.
 */

#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "slpos/propagation.hpp"
#include "slpos/signal.hpp"

namespace slpos {

using FimMatrix = Eigen::MatrixXd;

struct BoundOptions {
  double beta = 1.5;
  /// Condition number (after diagonal equilibration) above which the delay CRB is +inf.
  double condition_cutoff = 1e12;
};

struct BoundReport {
  double reb_los_only = 0.0;  // m
  double reb_all_paths = 0.0; // m, may be +inf
  double reb_waa = 0.0;       // m, +inf on destructive merge
  double merged_toa = 0.0;    // s
  double waa_bias = 0.0;      // m
  std::vector<std::size_t> cell_indices;
  std::vector<double> weights;
  cd merged_gain{0.0, 0.0};
  double beta = 0.0;
  bool destructive_interference = false;
};

FimMatrix fim(std::span<const PathComponent> paths, const PilotGrid& pilots,
              const OfdmConfig& config);

/// [J^-1]_{0,0}; +inf when J is (numerically) rank deficient.
double crb_delay(const FimMatrix& J, double condition_cutoff = 1e12);

/// Indices of the paths whose delay lies within the LoS resolution cell; always contains 0.
std::vector<std::size_t> resolution_cell(const ChannelSnapshot& channel, double beta,
                                         const OfdmConfig& config);

double reb_los_only(const ChannelSnapshot& channel, const PilotGrid& pilots,
                    const OfdmConfig& config, const BoundOptions& options = {});

double reb_all_paths(const ChannelSnapshot& channel, const PilotGrid& pilots,
                     const OfdmConfig& config, const BoundOptions& options = {});

/// Full report: WAA intermediates plus all three REBs.
BoundReport reb_waa(const ChannelSnapshot& channel, const PilotGrid& pilots,
                    const OfdmConfig& config, const BoundOptions& options = {});

}  // namespace slpos
