// SPDX-License-Identifier: Apache-2.0
#pragma once

/**
 * @file propagation.hpp
 * @brief Intersection scenarios, constant-velocity lanes and a deterministic
 * image-method multipath synthesizer (LoS, ground bounce, single-bounce facades).
 */

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slpos/common.hpp"

namespace slpos {

struct Pose {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

/// Axis-aligned opaque box.
struct BuildingBox {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
};

enum class Mover { Vehicle, Bicycle };

struct ScenarioConfig {
  int scenario_id = 1;
  std::optional<Pose> rsu;
  Vec3 vehicle_start = Vec3(1.6, -70.0, 1.5);  // moves along +y
  Vec3 bicycle_start = Vec3(-70.0, -7.0, 1.0);  // moves along +x
  double vehicle_speed = 14.0;
  double bicycle_speed = 4.0;
  double lane_limit = 70.0;  // lanes end at +lane_limit on their axis
  std::vector<BuildingBox> buildings;
  double measurement_interval = 0.1;
  double wavelength = kSpeedOfLight / 5.9e9;
  cd ground_reflection_coeff{-0.5, 0.0};
  cd wall_reflection_coeff{-0.6, 0.0};

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

enum class PathKind { LoS, Ground, Wall };

struct PathComponent {
  double delay = 0.0;  // s
  cd gain{0.0, 0.0};
  double radial_velocity = 0.0;  // m/s, rate of change of path length
  PathKind kind = PathKind::LoS;
  /// building_index * 4 + face for Wall paths, -1 otherwise.
  int wall_index = -1;
  /// Specular point for Ground and Wall paths.
  std::optional<Vec3> bounce_point;
};

struct ChannelSnapshot {
  std::vector<PathComponent> paths;  // ascending delay
  Pose tx_pose;
  Pose rx_pose;
  double time = 0.0;

  bool has_los() const { return !paths.empty() && paths.front().kind == PathKind::LoS; }
};

ScenarioConfig build_scenario(int scenario_id);

/// Seconds until the mover reaches its lane end.
double lane_horizon(const ScenarioConfig& config, Mover mover);

Pose sample_mover(const ScenarioConfig& config, Mover mover, double t);

struct TrajectorySample {
  Pose vehicle;
  Pose bicycle;
};

/// Both movers at time t; t must lie inside both lanes' horizons.
TrajectorySample sample_trajectory(const ScenarioConfig& config, double t);

/// True iff the open segment (a, b) passes through the interior of any box.
/// Grazing a face or an edge does not count.
bool segment_blocked(const Vec3& a, const Vec3& b, std::span<const BuildingBox> buildings);

/// Free-space amplitude lambda/(4 pi d) with carrier phase exp(-j 2 pi d / lambda).
cd friis_gain(const Vec3& tx, const Vec3& rx, double wavelength);
cd friis_gain(double distance, double wavelength);

ChannelSnapshot trace_paths(const Pose& tx, const Pose& rx, const ScenarioConfig& config);

// Flat key = value serialization. Unknown keys are rejected on load.
void write_scenario(std::ostream& out, const ScenarioConfig& config);
ScenarioConfig read_scenario(std::istream& in);
ScenarioConfig load_scenario_file(const std::string& path);

std::string to_string(PathKind kind);

}  // namespace slpos
