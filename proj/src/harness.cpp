// SPDX-License-Identifier: Apache-2.0
#include "slpos/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <mutex>
#include <thread>

namespace slpos {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<const char*, 10> kColumns{
    "sweep_coord_m", "true_range_m", "rmse_m",  "reb_los_m",    "reb_all_m",
    "reb_waa_m",     "waa_bias_m",   "n_paths", "n_cell_paths", "los_present"};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct LinkSample {
  double coord = 0.0;
  Pose tx;
  Pose rx;
};

Mover sweep_mover(Link link) {
  return link == Link::RsuBicycle ? Mover::Bicycle : Mover::Vehicle;
}

std::vector<LinkSample> link_samples(const RunConfig& cfg) {
  const auto& sc = cfg.scenario;
  double horizon = lane_horizon(sc, sweep_mover(cfg.link));
  if (cfg.link == Link::VehicleBicycle) {
    horizon = std::min(horizon, lane_horizon(sc, Mover::Bicycle));
  }
  if (!std::isfinite(horizon)) throw ConfigError("sweep mover never reaches its lane end");
  const auto count = static_cast<std::size_t>(std::floor(horizon / sc.measurement_interval + 1e-9)) + 1;

  std::vector<LinkSample> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) * sc.measurement_interval;
    LinkSample s;
    switch (cfg.link) {
      case Link::RsuVehicle:
        s.tx = *sc.rsu;
        s.rx = sample_mover(sc, Mover::Vehicle, t);
        s.coord = s.rx.position.y();
        break;
      case Link::RsuBicycle:
        s.tx = *sc.rsu;
        s.rx = sample_mover(sc, Mover::Bicycle, t);
        s.coord = s.rx.position.x();
        break;
      case Link::VehicleBicycle:
        s.tx = sample_mover(sc, Mover::Vehicle, t);
        s.rx = sample_mover(sc, Mover::Bicycle, t);
        s.coord = s.tx.position.y();
        break;
    }
    out.push_back(s);
  }
  return out;
}

void fill_bounds(CurvePoint& pt, const ChannelSnapshot& fwd, const PilotGrid& pilots,
                 const RunConfig& cfg) {
  pt.n_paths = static_cast<int>(fwd.paths.size());
  pt.los_present = fwd.has_los();
  if (!pt.los_present) {
    pt.reb_los = pt.reb_all = pt.reb_waa = pt.waa_bias = kNaN;
    pt.n_cell_paths = 0;
    return;
  }
  const BoundReport rep = reb_waa(fwd, pilots, cfg.ofdm, cfg.bounds);
  pt.reb_los = rep.reb_los_only;
  pt.reb_all = rep.reb_all_paths;
  pt.reb_waa = rep.reb_waa;
  pt.waa_bias = rep.waa_bias;
  pt.n_cell_paths = static_cast<int>(rep.cell_indices.size());
}

// Runs fn(i) for i in [0, n) on `workers` threads; each index is written by one thread only.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  unsigned threads = workers > 0 ? static_cast<unsigned>(workers)
                                 : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double parse_double(const std::string& text) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text == "nan") return kNaN;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("csv: bad number '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("csv: bad number '" + text + "'");
  return v;
}

}  // namespace

Link parse_link(std::string_view text) {
  if (text == "rsu-vehicle") return Link::RsuVehicle;
  if (text == "rsu-bicycle") return Link::RsuBicycle;
  if (text == "vehicle-bicycle") return Link::VehicleBicycle;
  throw ConfigError("unknown link '" + std::string(text) + "'");
}

std::string to_string(Link link) {
  switch (link) {
    case Link::RsuVehicle: return "rsu-vehicle";
    case Link::RsuBicycle: return "rsu-bicycle";
    case Link::VehicleBicycle: return "vehicle-bicycle";
  }
  return "unknown";
}

void RunConfig::validate() const {
  scenario.validate();
  ofdm.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (oversample < 1) throw ConfigError("oversample must be >= 1");
  if (!(bounds.beta > 1.0 && bounds.beta < 2.0)) throw ConfigError("beta must lie in (1, 2)");
  if (!(clock_bias_std >= 0.0)) throw ConfigError("clock_bias_std must be >= 0");
  if (!(processing_time >= 0.0)) throw ConfigError("processing_time must be >= 0");
  const bool has_rsu = scenario.rsu.has_value();
  if (link == Link::VehicleBicycle && scenario.scenario_id != 2) {
    throw ConfigError("vehicle-bicycle link is only defined for scenario 2");
  }
  if (link != Link::VehicleBicycle && (scenario.scenario_id != 1 || !has_rsu)) {
    throw ConfigError("rsu links are only defined for scenario 1");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t sample, std::uint64_t trial,
                          std::uint64_t stream) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ sample);
  h = splitmix64(h ^ trial);
  return splitmix64(h ^ stream);
}

std::vector<CurvePoint> run_bound_sweep(const RunConfig& cfg) {
  cfg.validate();
  const auto samples = link_samples(cfg);
  const PilotGrid pilots = make_pilots(cfg.ofdm, cfg.pilot_phase, cfg.seed);
  std::vector<CurvePoint> points(samples.size());
  parallel_for(samples.size(), cfg.workers, [&](std::size_t i) {
    const auto& s = samples[i];
    CurvePoint& pt = points[i];
    pt.sweep_coord = s.coord;
    pt.true_range = (s.tx.position - s.rx.position).norm();
    pt.rmse = kNaN;
    pt.mean_error = kNaN;
    fill_bounds(pt, trace_paths(s.tx, s.rx, cfg.scenario), pilots, cfg);
  });
  return points;
}

std::vector<CurvePoint> run_ranging_sweep(const RunConfig& cfg) {
  cfg.validate();
  const auto samples = link_samples(cfg);
  const PilotGrid pilots = make_pilots(cfg.ofdm, cfg.pilot_phase, cfg.seed);
  const auto window = make_window(cfg.window, cfg.ofdm.num_subcarriers);
  const double period = cfg.ofdm.max_delay();

  std::vector<CurvePoint> points(samples.size());
  parallel_for(samples.size(), cfg.workers, [&](std::size_t i) {
    const auto& s = samples[i];
    CurvePoint& pt = points[i];
    pt.sweep_coord = s.coord;
    pt.true_range = (s.tx.position - s.rx.position).norm();
    const ChannelSnapshot fwd = trace_paths(s.tx, s.rx, cfg.scenario);
    const ChannelSnapshot rev = trace_paths(s.rx, s.tx, cfg.scenario);
    fill_bounds(pt, fwd, pilots, cfg);

    const double one_way_var =
        pt.los_present && std::isfinite(pt.reb_waa) && pt.reb_waa > 0.0
            ? 0.25 * pt.reb_waa * pt.reb_waa
            : 1.0;
    double sq = 0.0;
    double sum = 0.0;
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const auto tr = static_cast<std::uint64_t>(trial);
      std::mt19937_64 bias_rng(derive_seed(cfg.seed, i, tr, 0));
      std::normal_distribution<double> bias_dist(0.0, 1.0);
      const double bias = cfg.clock_bias_std * bias_dist(bias_rng);

      const RxSymbols y_fwd = synthesize_rx(fwd, pilots, cfg.ofdm, derive_seed(cfg.seed, i, tr, 1),
                                            cfg.doppler_enabled, bias);
      const RxSymbols y_rev =
          synthesize_rx(rev, pilots, cfg.ofdm, derive_seed(cfg.seed, i, tr, 2), cfg.doppler_enabled,
                        -bias + cfg.processing_time);
      const ToaEstimate e_fwd =
          estimate_toa(delay_spectrum(y_fwd, pilots, cfg.ofdm, window, cfg.oversample), cfg.peak_policy);
      const ToaEstimate e_rev =
          estimate_toa(delay_spectrum(y_rev, pilots, cfg.ofdm, window, cfg.oversample), cfg.peak_policy);
      if (e_fwd.low_confidence || e_rev.low_confidence) ++pt.low_confidence_trials;

      const RangeMeasurement m =
          rtt_range(e_fwd.toa, e_rev.toa, cfg.processing_time, one_way_var, period);
      const double err = m.distance - pt.true_range;
      sq += err * err;
      sum += err;
    }
    pt.rmse = std::sqrt(sq / cfg.trials);
    pt.mean_error = sum / cfg.trials;
  });
  return points;
}

void export_spectra_csv(const RunConfig& cfg, const std::string& path) {
  cfg.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const auto samples = link_samples(cfg);
  const PilotGrid pilots = make_pilots(cfg.ofdm, cfg.pilot_phase, cfg.seed);
  const auto window = make_window(cfg.window, cfg.ofdm.num_subcarriers);
  out << "sweep_coord_m,bin,delay_s,power\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const ChannelSnapshot fwd = trace_paths(s.tx, s.rx, cfg.scenario);
    std::mt19937_64 bias_rng(derive_seed(cfg.seed, i, 0, 0));
    std::normal_distribution<double> bias_dist(0.0, 1.0);
    const double bias = cfg.clock_bias_std * bias_dist(bias_rng);
    const RxSymbols y = synthesize_rx(fwd, pilots, cfg.ofdm, derive_seed(cfg.seed, i, 0, 1),
                                      cfg.doppler_enabled, bias);
    const DelaySpectrum spec = delay_spectrum(y, pilots, cfg.ofdm, window, cfg.oversample);
    for (std::size_t k = 0; k < spec.power.size(); ++k) {
      out << format_double(s.coord) << ',' << k << ','
          << format_double(static_cast<double>(k) * spec.bin_spacing) << ','
          << format_double(spec.power[k]) << '\n';
    }
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<RequirementResult> score_requirements(std::span<const double> errors) {
  std::vector<double> sorted(errors.begin(), errors.end());
  for (auto& e : sorted) e = std::abs(e);
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  auto fraction_below = [&](double limit) {
    if (sorted.empty()) return 0.0;
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), limit);
    return static_cast<double>(it - sorted.begin()) / n;
  };
  std::vector<RequirementResult> out;
  for (const auto& set : kRequirementSets) {
    RequirementResult r{set};
    r.fraction_relaxed = fraction_below(set.accuracy_hi);
    r.meets_relaxed = r.fraction_relaxed >= set.confidence_lo;
    r.fraction_strict = fraction_below(set.accuracy_lo);
    r.meets_strict = r.fraction_strict >= set.confidence_hi;
    if (!sorted.empty()) {
      auto rank = static_cast<std::size_t>(std::ceil(set.confidence_lo * n - 1e-9));
      rank = std::clamp<std::size_t>(rank, 1, sorted.size());
      r.error_percentile = sorted[rank - 1];
    }
    out.push_back(r);
  }
  return out;
}

PositioningSummary run_positioning_demo(std::span<const Anchor> anchors, const Vec3& true_point,
                                        double sigma, int trials, std::uint64_t seed,
                                        const SolveOptions& options) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
  if (static_cast<int>(anchors.size()) < options.dim + 1) {
    throw ConfigError("positioning demo needs at least dim + 1 anchors");
  }
  PositioningSummary summary;
  summary.trials = trials;
  const std::vector<double> sigmas(anchors.size(), sigma);
  summary.crb = sigma > 0.0 ? position_crb_rmse(anchors, true_point, sigmas, options) : 0.0;

  const double reported_sigma = sigma > 0.0 ? sigma : 1.0;
  const std::vector<double> weights(anchors.size(), 1.0 / (reported_sigma * reported_sigma));
  std::vector<double> errors;
  errors.reserve(static_cast<std::size_t>(trials));
  double sq = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(derive_seed(seed, 0, static_cast<std::uint64_t>(trial), 3));
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<RangeObservation> obs;
    obs.reserve(anchors.size());
    for (const auto& a : anchors) {
      RangeObservation ob;
      ob.anchor = a;
      ob.range.distance = std::max(0.0, (true_point - a.position).norm() + sigma * noise(rng));
      ob.range.sigma = reported_sigma;
      obs.push_back(ob);
    }
    const Vec3 init = linear_init(obs, options);
    const PositionEstimate est = ml_position(obs, weights, init, options);
    if (est.converged) ++summary.converged;
    Vec3 err = est.position - true_point;
    if (options.dim == 2) err.z() = 0.0;
    errors.push_back(err.norm());
    sq += err.squaredNorm();
  }
  summary.rmse = std::sqrt(sq / trials);
  summary.requirements = score_requirements(errors);
  return summary;
}

CoherenceReport coherence_and_latency_check(const OfdmConfig& config, double v_max,
                                            double accuracy_req) {
  config.validate();
  if (v_max < 0.0 || !std::isfinite(v_max)) throw ConfigError("v_max must be finite and >= 0");
  if (!(accuracy_req > 0.0)) throw ConfigError("accuracy requirement must be > 0");
  CoherenceReport r;
  r.num_symbols = config.num_symbols;
  if (v_max == 0.0) {
    r.unbounded = true;
    r.coherence_symbols = r.margin = r.latency_budget = std::numeric_limits<double>::infinity();
    return r;
  }
  r.coherence_symbols = config.wavelength() * config.subcarrier_spacing / v_max;
  r.margin = r.coherence_symbols / config.num_symbols;
  r.latency_budget = 0.1 * accuracy_req / v_max;
  return r;
}

void write_csv(std::ostream& out, std::span<const CurvePoint> points) {
  for (std::size_t c = 0; c < kColumns.size(); ++c) out << (c ? "," : "") << kColumns[c];
  out << '\n';
  for (const auto& p : points) {
    out << format_double(p.sweep_coord) << ',' << format_double(p.true_range) << ','
        << format_double(p.rmse) << ',' << format_double(p.reb_los) << ','
        << format_double(p.reb_all) << ',' << format_double(p.reb_waa) << ','
        << format_double(p.waa_bias) << ',' << p.n_paths << ',' << p.n_cell_paths << ','
        << (p.los_present ? 1 : 0) << '\n';
  }
}

std::vector<CurvePoint> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: missing header");
  std::string expected;
  for (std::size_t c = 0; c < kColumns.size(); ++c) expected += (c ? "," : "") + std::string(kColumns[c]);
  if (line != expected) throw ConfigError("csv: unexpected header '" + line + "'");
  std::vector<CurvePoint> points;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != kColumns.size()) throw ConfigError("csv: wrong column count");
    CurvePoint p;
    p.sweep_coord = parse_double(cells[0]);
    p.true_range = parse_double(cells[1]);
    p.rmse = parse_double(cells[2]);
    p.reb_los = parse_double(cells[3]);
    p.reb_all = parse_double(cells[4]);
    p.reb_waa = parse_double(cells[5]);
    p.waa_bias = parse_double(cells[6]);
    p.n_paths = static_cast<int>(parse_double(cells[7]));
    p.n_cell_paths = static_cast<int>(parse_double(cells[8]));
    p.los_present = parse_double(cells[9]) != 0.0;
    points.push_back(p);
  }
  return points;
}

void export_csv(std::span<const CurvePoint> points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, points);
  out.flush();
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace slpos
