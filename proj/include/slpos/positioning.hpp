// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "slpos/estimation.hpp"

namespace slpos {

struct Anchor {
  Vec3 position = Vec3::Zero();
  std::string id;
};

struct RangeObservation {
  RangeMeasurement range;
  Anchor anchor;
};

struct SolveOptions {
  /// 2: solve for (x, y) with z fixed to known_height; 3: full 3D.
  int dim = 2;
  double known_height = 0.0;
  int max_iters = 50;
  /// Convergence when |grad| <= tol * sum_i w_i max(d_i, 1).
  double tol = 1e-9;
};

struct PositionEstimate {
  Vec3 position = Vec3::Zero();
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Closed-form start point: subtract the first squared-range equation from the
/// others and solve the resulting linear least-squares problem. Throws
/// ConfigError on rank-deficient anchor geometry.
Vec3 linear_init(std::span<const RangeObservation> observations, const SolveOptions& options = {});

/// Weighted range cost sum_i w_i (d_i - |x - x_i|)^2.
double range_cost(std::span<const RangeObservation> observations, std::span<const double> weights,
                  const Vec3& x);

/// Gauss-Newton with step halving on the weighted range cost. Never throws on
/// non-convergence; `converged` reports it.
PositionEstimate ml_position(std::span<const RangeObservation> observations,
                             std::span<const double> weights, const Vec3& init,
                             const SolveOptions& options = {});

/// 1 / sigma_i^2 from each measurement.
std::vector<double> inverse_variance_weights(std::span<const RangeObservation> observations);

/// sqrt(trace(J^-1)) for J = sum_i u_i u_i^T / sigma_i^2 in the solved dimensions.
double position_crb_rmse(std::span<const Anchor> anchors, const Vec3& point,
                         std::span<const double> sigmas, const SolveOptions& options = {});

}  // namespace slpos
