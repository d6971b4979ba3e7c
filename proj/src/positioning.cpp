// SPDX-License-Identifier: Apache-2.0
#include "slpos/positioning.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace slpos {

namespace {

constexpr double kCollision = 1e-12;  // m
constexpr double kNudge = 1e-6;       // m

void check_dim(const SolveOptions& o) {
  if (o.dim != 2 && o.dim != 3) throw ConfigError("dim must be 2 or 3");
}

// Range projected onto the solved subspace: in 2D the known height offset is removed.
double effective_range(const RangeObservation& ob, const SolveOptions& o) {
  const double d = ob.range.distance;
  if (o.dim == 3) return d;
  const double dz = ob.anchor.position.z() - o.known_height;
  return std::sqrt(std::max(0.0, d * d - dz * dz));
}

Eigen::VectorXd head(const Vec3& v, int dim) { return v.head(dim); }

Vec3 lift(const Eigen::VectorXd& x, const SolveOptions& o) {
  if (o.dim == 3) return x;
  return {x[0], x[1], o.known_height};
}

}  // namespace

Vec3 linear_init(std::span<const RangeObservation> obs, const SolveOptions& options) {
  check_dim(options);
  const int dim = options.dim;
  if (static_cast<int>(obs.size()) < dim + 1) {
    throw ConfigError("linear_init: need at least dim + 1 anchors");
  }
  const Eigen::VectorXd p0 = head(obs[0].anchor.position, dim);
  const double d0 = effective_range(obs[0], options);
  const auto rows = static_cast<Eigen::Index>(obs.size() - 1);
  Eigen::MatrixXd A(rows, dim);
  Eigen::VectorXd b(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& ob = obs[static_cast<std::size_t>(i + 1)];
    const Eigen::VectorXd pi = head(ob.anchor.position, dim);
    const double di = effective_range(ob, options);
    A.row(i) = 2.0 * (pi - p0).transpose();
    b[i] = pi.squaredNorm() - p0.squaredNorm() - di * di + d0 * d0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (qr.rank() < dim) throw ConfigError("linear_init: rank-deficient anchor geometry");
  return lift(qr.solve(b), options);
}

double range_cost(std::span<const RangeObservation> obs, std::span<const double> weights,
                  const Vec3& x) {
  if (weights.size() != obs.size()) throw ConfigError("range_cost: weight count mismatch");
  double cost = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double r = obs[i].range.distance - (x - obs[i].anchor.position).norm();
    cost += weights[i] * r * r;
  }
  return cost;
}

PositionEstimate ml_position(std::span<const RangeObservation> obs, std::span<const double> weights,
                             const Vec3& init, const SolveOptions& options) {
  check_dim(options);
  const int dim = options.dim;
  if (static_cast<int>(obs.size()) < dim) throw ConfigError("ml_position: need at least dim anchors");
  if (weights.size() != obs.size()) throw ConfigError("ml_position: weight count mismatch");
  if (!is_finite(init)) throw ConfigError("ml_position: non-finite initial point");
  double grad_scale = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!(weights[i] > 0.0)) throw ConfigError("ml_position: weights must be positive");
    grad_scale += weights[i] * std::max(obs[i].range.distance, 1.0);
  }
  const double grad_tol = options.tol * grad_scale;

  Vec3 x = init;
  if (dim == 2) x.z() = options.known_height;
  PositionEstimate est;

  const auto m = static_cast<Eigen::Index>(obs.size());
  Eigen::MatrixXd Jac(m, dim);
  Eigen::VectorXd res(m);
  Eigen::VectorXd w(m);
  for (Eigen::Index i = 0; i < m; ++i) w[i] = weights[static_cast<std::size_t>(i)];

  double cost = range_cost(obs, weights, x);
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  for (int iter = 0; iter < options.max_iters; ++iter) {
    double cost_noise = 0.0;  // rounding level of range_cost near x
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& anchor = obs[static_cast<std::size_t>(i)].anchor.position;
      Vec3 diff = x - anchor;
      double dist = diff.norm();
      if (dist < kCollision) {
        x += Vec3::UnitX() * kNudge;
        diff = x - anchor;
        dist = diff.norm();
        cost = range_cost(obs, weights, x);
      }
      // residual r = d_i - |x - x_i|; dr/dx = -u_i
      res[i] = obs[static_cast<std::size_t>(i)].range.distance - dist;
      Jac.row(i) = -(diff / dist).head(dim).transpose();
      cost_noise += 16.0 * kEps * w[i] * dist * (std::abs(res[i]) + kEps * dist);
    }
    const Eigen::VectorXd grad = 2.0 * Jac.transpose() * w.asDiagonal() * res;
    est.iterations = iter;
    if (grad.norm() <= grad_tol) {
      est.converged = true;
      break;
    }
    const Eigen::MatrixXd H = Jac.transpose() * w.asDiagonal() * Jac;
    const Eigen::VectorXd rhs = -Jac.transpose() * w.asDiagonal() * res;
    Eigen::VectorXd step = H.ldlt().solve(rhs);
    if (!step.allFinite()) step = -0.5 * grad;

    bool accepted = false;
    double alpha = 1.0;
    for (int k = 0; k < 40; ++k, alpha *= 0.5) {
      Vec3 trial = x;
      trial.head(dim) += alpha * step;
      const double c = range_cost(obs, weights, trial);
      // A full Gauss-Newton step is also taken when the change is below rounding.
      if (c < cost || (k == 0 && c <= cost + cost_noise)) {
        accepted = true;
        x = trial;
        cost = c;
        break;
      }
    }
    est.iterations = iter + 1;
    if (!accepted) break;  // no further decrease possible at this precision
  }
  if (!est.converged) {
    // Final gradient check so a stall exactly at the optimum is still reported as converged.
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Vec3 diff = x - obs[static_cast<std::size_t>(i)].anchor.position;
      const double dist = diff.norm();
      if (dist < kCollision) continue;
      const double r = obs[static_cast<std::size_t>(i)].range.distance - dist;
      grad += -2.0 * w[i] * r * (diff / dist).head(dim);
    }
    est.converged = grad.norm() <= grad_tol;
  }
  est.position = x;
  est.cost = cost;
  return est;
}

std::vector<double> inverse_variance_weights(std::span<const RangeObservation> obs) {
  std::vector<double> w;
  w.reserve(obs.size());
  for (const auto& ob : obs) {
    if (!(ob.range.sigma > 0.0)) throw ConfigError("range sigma must be > 0");
    w.push_back(1.0 / (ob.range.sigma * ob.range.sigma));
  }
  return w;
}

double position_crb_rmse(std::span<const Anchor> anchors, const Vec3& point,
                         std::span<const double> sigmas, const SolveOptions& options) {
  check_dim(options);
  if (sigmas.size() != anchors.size()) throw ConfigError("position_crb_rmse: sigma count mismatch");
  const int dim = options.dim;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const Vec3 diff = point - anchors[i].position;
    const double dist = diff.norm();
    if (dist < kCollision) continue;
    const Eigen::VectorXd u = (diff / dist).head(dim);
    J += (u * u.transpose()) / (sigmas[i] * sigmas[i]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
  if (!lu.isInvertible()) throw ConfigError("position_crb_rmse: degenerate geometry");
  return std::sqrt(lu.inverse().trace());
}

}  // namespace slpos
