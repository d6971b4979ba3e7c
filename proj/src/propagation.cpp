// SPDX-License-Identifier: Apache-2.0
#include "slpos/propagation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace slpos {

namespace {

constexpr double kBlockEps = 1e-12;  // parametric overlap treated as grazing
constexpr double kFaceTol = 1e-9;    // m

Vec3 lane_direction(Mover mover) {
  return mover == Mover::Vehicle ? Vec3(0.0, 1.0, 0.0) : Vec3(1.0, 0.0, 0.0);
}

// Path length rate for a source/receiver pair (image geometry already applied).
double length_rate(const Vec3& p_tx, const Vec3& v_tx, const Vec3& p_rx, const Vec3& v_rx) {
  const Vec3 d = p_rx - p_tx;
  const double len = d.norm();
  return len > 0.0 ? d.dot(v_rx - v_tx) / len : 0.0;
}

struct Facade {
  int axis;       // 0 = x, 1 = y
  double plane;   // coordinate of the face
  double outward; // +1 or -1
};

std::array<Facade, 4> facades(const BuildingBox& box) {
  return {{{0, box.center.x() + box.half_extents.x(), +1.0},
           {0, box.center.x() - box.half_extents.x(), -1.0},
           {1, box.center.y() + box.half_extents.y(), +1.0},
           {1, box.center.y() - box.half_extents.y(), -1.0}}};
}

std::string format_vec(const Vec3& v) {
  std::ostringstream os;
  os.precision(17);
  os << v.x() << ' ' << v.y() << ' ' << v.z();
  return os.str();
}

std::vector<double> parse_numbers(const std::string& key, const std::string& text,
                                  std::size_t expected) {
  std::istringstream is(text);
  std::vector<double> out;
  double v = 0.0;
  while (is >> v) out.push_back(v);
  if (!is.eof() || out.size() != expected) {
    throw ConfigError("scenario key '" + key + "': expected " + std::to_string(expected) +
                      " numbers, got '" + text + "'");
  }
  return out;
}

Vec3 parse_vec(const std::string& key, const std::string& text) {
  const auto n = parse_numbers(key, text, 3);
  return {n[0], n[1], n[2]};
}

cd parse_complex(const std::string& key, const std::string& text) {
  const auto n = parse_numbers(key, text, 2);
  return {n[0], n[1]};
}

double parse_scalar(const std::string& key, const std::string& text) {
  return parse_numbers(key, text, 1).front();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void ScenarioConfig::validate() const {
  if (scenario_id != 1 && scenario_id != 2) {
    throw ConfigError("scenario_id must be 1 or 2");
  }
  if (scenario_id == 1 && !rsu) throw ConfigError("scenario 1 requires an RSU");
  if (scenario_id == 2 && rsu) throw ConfigError("scenario 2 has no RSU");
  if (rsu && (!is_finite(rsu->position) || !rsu->velocity.isZero(0.0))) {
    throw ConfigError("RSU pose must be finite and static");
  }
  if (!(measurement_interval > 0.0)) throw ConfigError("measurement_interval must be > 0");
  if (!(wavelength > 0.0)) throw ConfigError("wavelength must be > 0");
  if (!(vehicle_speed >= 0.0) || !(bicycle_speed >= 0.0)) {
    throw ConfigError("speeds must be non-negative");
  }
  if (!is_finite(vehicle_start) || !is_finite(bicycle_start)) {
    throw ConfigError("lane start positions must be finite");
  }
  if (std::abs(ground_reflection_coeff) > 1.0 || std::abs(wall_reflection_coeff) > 1.0) {
    throw ConfigError("reflection coefficient magnitudes must be <= 1");
  }
  for (const auto& b : buildings) {
    if (!is_finite(b.center) || !(b.half_extents.array() > 0.0).all()) {
      throw ConfigError("building half extents must be strictly positive");
    }
  }
}

ScenarioConfig build_scenario(int scenario_id) {
  if (scenario_id != 1 && scenario_id != 2) {
    throw ConfigError("invalid scenario id " + std::to_string(scenario_id));
  }
  ScenarioConfig cfg;
  cfg.scenario_id = scenario_id;
  for (double sx : {1.0, -1.0}) {
    for (double sy : {1.0, -1.0}) {
      cfg.buildings.push_back({Vec3(45.0 * sx, 45.0 * sy, 15.0), Vec3(25.0, 25.0, 15.0)});
    }
  }
  if (scenario_id == 1) {
    cfg.rsu = Pose{Vec3(0.0, 0.0, 10.0), Vec3::Zero()};
    cfg.bicycle_start = Vec3(-70.0, -7.0, 1.0);
  } else {
    cfg.bicycle_start = Vec3(-16.4, -7.0, 1.0);
  }
  return cfg;
}

double lane_horizon(const ScenarioConfig& config, Mover mover) {
  const bool vehicle = mover == Mover::Vehicle;
  const double start = vehicle ? config.vehicle_start.y() : config.bicycle_start.x();
  const double speed = vehicle ? config.vehicle_speed : config.bicycle_speed;
  const double remaining = config.lane_limit - start;
  if (speed <= 0.0) return remaining >= 0.0 ? INFINITY : 0.0;
  return std::max(0.0, remaining / speed);
}

Pose sample_mover(const ScenarioConfig& config, Mover mover, double t) {
  // Tolerate accumulated rounding when t is produced as k * interval.
  const double horizon = lane_horizon(config, mover);
  if (!(t >= 0.0) || t > horizon * (1.0 + 1e-12) + 1e-12) {
    throw ConfigError("time " + std::to_string(t) + " s is outside the lane horizon");
  }
  const bool vehicle = mover == Mover::Vehicle;
  const Vec3 dir = lane_direction(mover);
  const double speed = vehicle ? config.vehicle_speed : config.bicycle_speed;
  const Vec3& start = vehicle ? config.vehicle_start : config.bicycle_start;
  return Pose{start + dir * (speed * t), dir * speed};
}

TrajectorySample sample_trajectory(const ScenarioConfig& config, double t) {
  return {sample_mover(config, Mover::Vehicle, t), sample_mover(config, Mover::Bicycle, t)};
}

bool segment_blocked(const Vec3& a, const Vec3& b, std::span<const BuildingBox> buildings) {
  const Vec3 d = b - a;
  for (const auto& box : buildings) {
    const Vec3 lo = box.center - box.half_extents;
    const Vec3 hi = box.center + box.half_extents;
    double t_in = 0.0;
    double t_out = 1.0;
    bool miss = false;
    for (int i = 0; i < 3 && !miss; ++i) {
      if (d[i] == 0.0) {
        miss = !(a[i] > lo[i] && a[i] < hi[i]);
        continue;
      }
      double t1 = (lo[i] - a[i]) / d[i];
      double t2 = (hi[i] - a[i]) / d[i];
      if (t1 > t2) std::swap(t1, t2);
      t_in = std::max(t_in, t1);
      t_out = std::min(t_out, t2);
      miss = t_out - t_in <= kBlockEps;
    }
    if (!miss) return true;
  }
  return false;
}

cd friis_gain(double distance, double wavelength) {
  if (!(distance > 0.0)) throw ConfigError("friis_gain: zero distance");
  const double amp = wavelength / (4.0 * kPi * distance);
  return std::polar(amp, -2.0 * kPi * distance / wavelength);
}

cd friis_gain(const Vec3& tx, const Vec3& rx, double wavelength) {
  return friis_gain((tx - rx).norm(), wavelength);
}

ChannelSnapshot trace_paths(const Pose& tx, const Pose& rx, const ScenarioConfig& config) {
  const Vec3& a = tx.position;
  const Vec3& b = rx.position;
  if ((a - b).norm() == 0.0) throw ConfigError("trace_paths: coincident endpoints");

  ChannelSnapshot snap;
  snap.tx_pose = tx;
  snap.rx_pose = rx;
  const auto& blds = config.buildings;

  if (!segment_blocked(a, b, blds)) {
    const double len = (b - a).norm();
    PathComponent p;
    p.delay = len / kSpeedOfLight;
    p.gain = friis_gain(len, config.wavelength);
    p.radial_velocity = length_rate(a, tx.velocity, b, rx.velocity);
    p.kind = PathKind::LoS;
    snap.paths.push_back(p);
  }

  // Ground bounce via the receiver image below z = 0.
  if (std::abs(config.ground_reflection_coeff) > 0.0 && a.z() > 0.0 && b.z() > 0.0) {
    const Vec3 img(b.x(), b.y(), -b.z());
    const Vec3 img_vel(rx.velocity.x(), rx.velocity.y(), -rx.velocity.z());
    Vec3 point = a + (img - a) * (a.z() / (a.z() + b.z()));
    point.z() = 0.0;
    if (!segment_blocked(a, point, blds) && !segment_blocked(point, b, blds)) {
      const double len = (img - a).norm();
      PathComponent p;
      p.delay = len / kSpeedOfLight;
      p.gain = friis_gain(len, config.wavelength) * config.ground_reflection_coeff;
      p.radial_velocity = length_rate(a, tx.velocity, img, img_vel);
      p.kind = PathKind::Ground;
      p.bounce_point = point;
      snap.paths.push_back(p);
    }
  }

  if (std::abs(config.wall_reflection_coeff) > 0.0) {
    for (std::size_t bi = 0; bi < blds.size(); ++bi) {
      const auto& box = blds[bi];
      const auto faces = facades(box);
      for (std::size_t fi = 0; fi < faces.size(); ++fi) {
        const Facade& f = faces[fi];
        const int ax = f.axis;
        const double side_a = (a[ax] - f.plane) * f.outward;
        const double side_b = (b[ax] - f.plane) * f.outward;
        if (side_a <= 0.0 || side_b <= 0.0) continue;

        Vec3 img = b;
        img[ax] = 2.0 * f.plane - b[ax];
        Vec3 img_vel = rx.velocity;
        img_vel[ax] = -img_vel[ax];
        const double s = (f.plane - a[ax]) / (img[ax] - a[ax]);
        Vec3 point = a + (img - a) * s;
        point[ax] = f.plane;

        const int other = 1 - ax;
        const double lo_o = box.center[other] - box.half_extents[other];
        const double hi_o = box.center[other] + box.half_extents[other];
        const double lo_z = box.center.z() - box.half_extents.z();
        const double hi_z = box.center.z() + box.half_extents.z();
        if (point[other] < lo_o - kFaceTol || point[other] > hi_o + kFaceTol ||
            point.z() < lo_z - kFaceTol || point.z() > hi_z + kFaceTol) {
          continue;
        }
        if (segment_blocked(a, point, blds) || segment_blocked(point, b, blds)) continue;

        const double len = (img - a).norm();
        PathComponent p;
        p.delay = len / kSpeedOfLight;
        p.gain = friis_gain(len, config.wavelength) * config.wall_reflection_coeff;
        p.radial_velocity = length_rate(a, tx.velocity, img, img_vel);
        p.kind = PathKind::Wall;
        p.wall_index = static_cast<int>(bi * 4 + fi);
        p.bounce_point = point;
        snap.paths.push_back(p);
      }
    }
  }

  std::stable_sort(snap.paths.begin(), snap.paths.end(),
                   [](const PathComponent& l, const PathComponent& r) { return l.delay < r.delay; });
  return snap;
}

std::string to_string(PathKind kind) {
  switch (kind) {
    case PathKind::LoS: return "los";
    case PathKind::Ground: return "ground";
    case PathKind::Wall: return "wall";
  }
  return "unknown";
}

void write_scenario(std::ostream& out, const ScenarioConfig& c) {
  out.precision(17);
  out << "# slpos scenario\n";
  out << "scenario_id = " << c.scenario_id << '\n';
  out << "rsu_position = " << (c.rsu ? format_vec(c.rsu->position) : std::string("none")) << '\n';
  out << "vehicle_start = " << format_vec(c.vehicle_start) << '\n';
  out << "vehicle_speed = " << c.vehicle_speed << '\n';
  out << "bicycle_start = " << format_vec(c.bicycle_start) << '\n';
  out << "bicycle_speed = " << c.bicycle_speed << '\n';
  out << "lane_limit = " << c.lane_limit << '\n';
  out << "measurement_interval = " << c.measurement_interval << '\n';
  out << "wavelength = " << c.wavelength << '\n';
  out << "ground_reflection_coeff = " << c.ground_reflection_coeff.real() << ' '
      << c.ground_reflection_coeff.imag() << '\n';
  out << "wall_reflection_coeff = " << c.wall_reflection_coeff.real() << ' '
      << c.wall_reflection_coeff.imag() << '\n';
  if (c.buildings.empty()) out << "buildings = none\n";
  for (const auto& b : c.buildings) {
    out << "building = " << format_vec(b.center) << ' ' << format_vec(b.half_extents) << '\n';
  }
}

ScenarioConfig read_scenario(std::istream& in) {
  std::map<std::string, std::string> values;
  std::vector<std::string> building_lines;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("scenario line " + std::to_string(lineno) + ": missing '='");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "building") {
      building_lines.push_back(value);
    } else {
      values[key] = value;
    }
  }

  int id = 1;
  if (auto it = values.find("scenario_id"); it != values.end()) {
    const double v = parse_scalar("scenario_id", it->second);
    id = static_cast<int>(v);
    if (v != id) throw ConfigError("scenario_id must be an integer");
    values.erase(it);
  }
  ScenarioConfig cfg = build_scenario(id);

  for (const auto& [key, value] : values) {
    if (key == "rsu_position") {
      if (value == "none") {
        cfg.rsu.reset();
      } else {
        cfg.rsu = Pose{parse_vec(key, value), Vec3::Zero()};
      }
    } else if (key == "vehicle_start") {
      cfg.vehicle_start = parse_vec(key, value);
    } else if (key == "vehicle_speed") {
      cfg.vehicle_speed = parse_scalar(key, value);
    } else if (key == "bicycle_start") {
      cfg.bicycle_start = parse_vec(key, value);
    } else if (key == "bicycle_speed") {
      cfg.bicycle_speed = parse_scalar(key, value);
    } else if (key == "lane_limit") {
      cfg.lane_limit = parse_scalar(key, value);
    } else if (key == "measurement_interval") {
      cfg.measurement_interval = parse_scalar(key, value);
    } else if (key == "wavelength") {
      cfg.wavelength = parse_scalar(key, value);
    } else if (key == "ground_reflection_coeff") {
      cfg.ground_reflection_coeff = parse_complex(key, value);
    } else if (key == "wall_reflection_coeff") {
      cfg.wall_reflection_coeff = parse_complex(key, value);
    } else if (key == "buildings" && value == "none") {
      cfg.buildings.clear();
    } else {
      throw ConfigError("unknown scenario key '" + key + "'");
    }
  }
  if (!building_lines.empty()) {
    cfg.buildings.clear();
    for (const auto& text : building_lines) {
      const auto n = parse_numbers("building", text, 6);
      cfg.buildings.push_back({Vec3(n[0], n[1], n[2]), Vec3(n[3], n[4], n[5])});
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file '" + path + "'");
  return read_scenario(in);
}

}  // namespace slpos
