// SPDX-License-Identifier: Apache-2.0
#include "slpos/bounds.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace slpos {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_los(const ChannelSnapshot& channel) {
  if (!channel.has_los()) throw ConfigError("bound requires a LoS path at index 0");
}

void check_beta(double beta) {
  if (!(beta > 1.0 && beta < 2.0)) throw ConfigError("beta must lie in (1, 2)");
}

double reb_from_paths(std::span<const PathComponent> paths, const PilotGrid& pilots,
                      const OfdmConfig& config, const BoundOptions& options) {
  return kSpeedOfLight * std::sqrt(crb_delay(fim(paths, pilots, config), options.condition_cutoff));
}

}  // namespace

FimMatrix fim(std::span<const PathComponent> paths, const PilotGrid& pilots,
              const OfdmConfig& config) {
  if (paths.empty()) throw ConfigError("fim: empty path list");
  const double n0 = noise_variance(config);
  if (!(n0 > 0.0)) throw ConfigError("fim: noise variance must be positive");
  const int cols = config.num_subcarriers;
  if (pilots.symbols.cols() != cols || pilots.symbols.rows() != config.num_symbols) {
    throw ConfigError("fim: pilot grid dimensions do not match the OFDM config");
  }
  const double df = config.subcarrier_spacing;

  // Pilot energy per subcarrier summed over symbols; every derivative of the
  // mean factorizes as s_{t,n} * f(n), so sum_t reduces to this weight.
  const Eigen::VectorXd energy = pilots.symbols.cwiseAbs2().colwise().sum().transpose();

  const auto L = static_cast<Eigen::Index>(paths.size());
  Eigen::MatrixXcd D(cols, 3 * L);
  for (Eigen::Index l = 0; l < L; ++l) {
    const auto& p = paths[static_cast<std::size_t>(l)];
    for (int n = 0; n < cols; ++n) {
      const cd steer = std::polar(1.0, -2.0 * kPi * n * p.delay * df);
      D(n, 3 * l) = p.gain * cd(0.0, -2.0 * kPi * n * df) * steer;
      D(n, 3 * l + 1) = steer;
      D(n, 3 * l + 2) = cd(0.0, 1.0) * steer;
    }
  }
  const Eigen::MatrixXcd weighted = energy.asDiagonal() * D;
  FimMatrix J = (2.0 / n0) * (D.adjoint() * weighted).real();
  return 0.5 * (J + J.transpose());
}

double crb_delay(const FimMatrix& J, double condition_cutoff) {
  if (J.rows() == 0 || J.rows() != J.cols()) throw ConfigError("crb_delay: J must be square");
  const Eigen::VectorXd diag = J.diagonal();
  if ((diag.array() <= 0.0).any() || !diag.allFinite()) return kInf;

  // Equilibrate so that delay (s) and gain (linear) entries are comparable
  // before judging conditioning.
  const Eigen::VectorXd scale = diag.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd Jn = scale.asDiagonal() * J * scale.asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Jn);
  if (eig.info() != Eigen::Success) return kInf;
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double max_ev = ev.maxCoeff();
  const double min_ev = ev.minCoeff();
  if (!(min_ev > 0.0) || max_ev / min_ev > condition_cutoff) return kInf;

  // [Jn^-1]_00 = sum_k V_0k^2 / lambda_k
  const Eigen::MatrixXd& V = eig.eigenvectors();
  const double inv00 = (V.row(0).array().square() / ev.transpose().array()).sum();
  return inv00 * scale[0] * scale[0];
}

std::vector<std::size_t> resolution_cell(const ChannelSnapshot& channel, double beta,
                                         const OfdmConfig& config) {
  require_los(channel);
  check_beta(beta);
  const double half_width = beta / (config.num_subcarriers * config.subcarrier_spacing);
  const double tau0 = channel.paths.front().delay;
  std::vector<std::size_t> cell;
  for (std::size_t l = 0; l < channel.paths.size(); ++l) {
    if (l == 0 || std::abs(channel.paths[l].delay - tau0) <= half_width) cell.push_back(l);
  }
  return cell;
}

double reb_los_only(const ChannelSnapshot& channel, const PilotGrid& pilots,
                    const OfdmConfig& config, const BoundOptions& options) {
  require_los(channel);
  return reb_from_paths(std::span(channel.paths.data(), 1), pilots, config, options);
}

double reb_all_paths(const ChannelSnapshot& channel, const PilotGrid& pilots,
                     const OfdmConfig& config, const BoundOptions& options) {
  const auto cell = resolution_cell(channel, options.beta, config);
  std::vector<PathComponent> subset;
  subset.reserve(cell.size());
  for (auto l : cell) subset.push_back(channel.paths[l]);
  return reb_from_paths(subset, pilots, config, options);
}

BoundReport reb_waa(const ChannelSnapshot& channel, const PilotGrid& pilots,
                    const OfdmConfig& config, const BoundOptions& options) {
  BoundReport r;
  r.beta = options.beta;
  r.cell_indices = resolution_cell(channel, options.beta, config);
  r.reb_los_only = reb_los_only(channel, pilots, config, options);
  r.reb_all_paths = reb_all_paths(channel, pilots, config, options);

  double amp_sum = 0.0;
  double amp_max = 0.0;
  for (auto l : r.cell_indices) {
    const double a = std::abs(channel.paths[l].gain);
    amp_sum += a;
    amp_max = std::max(amp_max, a);
  }
  if (!(amp_sum > 0.0)) throw ConfigError("reb_waa: in-cell paths have zero amplitude");

  const double tau0 = channel.paths.front().delay;
  double merged = 0.0;
  r.weights.reserve(r.cell_indices.size());
  for (auto l : r.cell_indices) {
    const auto& p = channel.paths[l];
    const double w = std::abs(p.gain) / amp_sum;
    r.weights.push_back(w);
    // Accumulate the offset from tau0 so a lone LoS reproduces tau0 bit-exactly.
    merged += w * (p.delay - tau0);
    r.merged_gain += p.gain;
  }
  r.merged_toa = tau0 + merged;
  const double bias_s = std::abs(merged);
  r.waa_bias = kSpeedOfLight * bias_s;

  if (std::abs(r.merged_gain) < 1e-12 * amp_max) {
    r.destructive_interference = true;
    r.reb_waa = kInf;
    return r;
  }
  PathComponent effective = channel.paths.front();
  effective.delay = r.merged_toa;
  effective.gain = r.merged_gain;
  const double var = crb_delay(fim(std::span(&effective, 1), pilots, config), options.condition_cutoff);
  r.reb_waa = kSpeedOfLight * std::sqrt(var + bias_s * bias_s);
  return r;
}

}  // namespace slpos
