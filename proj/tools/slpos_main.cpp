// SPDX-License-Identifier: Apache-2.0
//
// slpos: sidelink ranging/positioning simulation front end.
//
//   slpos scenario --id 1 --dump
//   slpos ranging  --scenario 1 --link rsu-vehicle --trials 100 --seed 42 --out curve.csv
//   slpos bounds   --scenario 1 --link rsu-vehicle --out bounds.csv
//   slpos position --anchors anchors.txt --sigma 1 --trials 1000
//   slpos check    --vmax 14 --accuracy 3
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slpos/harness.hpp"

namespace {

using namespace slpos;

struct RangingArgs {
  int scenario = 1;
  std::string link = "rsu-vehicle";
  std::string config_file;
  int trials = 100;
  std::uint64_t seed = 42;
  double beta = 1.5;
  double cond_cutoff = 1e12;
  int oversample = 16;
  std::string peak = "global";
  double threshold_db = 6.0;
  std::string window = "hamming";
  std::string pilots = "ones";
  bool no_doppler = false;
  double clock_bias_std = 1e-6;
  double processing_time = 0.0;
  std::optional<double> tx_power_dbm;
  int workers = 1;
  std::string out;
  std::string spectra_out;
};

void add_run_options(CLI::App* cmd, RangingArgs& a, bool monte_carlo) {
  cmd->add_option("--scenario", a.scenario, "Scenario id (1 or 2)");
  cmd->add_option("--link", a.link, "rsu-vehicle | rsu-bicycle | vehicle-bicycle");
  cmd->add_option("--config", a.config_file, "Scenario key=value file (overrides --scenario)");
  cmd->add_option("--beta", a.beta, "Resolution cell factor, 1 < beta < 2");
  cmd->add_option("--cond-cutoff", a.cond_cutoff, "Condition number treated as singular");
  cmd->add_option("--pilots", a.pilots, "ones | random");
  cmd->add_option("--tx-power-dbm", a.tx_power_dbm, "Override transmit power");
  cmd->add_option("--seed", a.seed, "Master seed");
  cmd->add_option("--workers", a.workers, "Worker threads (0 = all cores)");
  cmd->add_option("--out", a.out, "Output CSV (stdout when empty)");
  if (!monte_carlo) return;
  cmd->add_option("--trials", a.trials, "Monte Carlo trials per sample");
  cmd->add_option("--oversample", a.oversample, "IDFT oversampling factor");
  cmd->add_option("--peak", a.peak, "global | first");
  cmd->add_option("--threshold-db", a.threshold_db, "First-peak acceptance threshold");
  cmd->add_option("--window", a.window, "hamming | rect");
  cmd->add_flag("--no-doppler", a.no_doppler, "Disable the Doppler phase term");
  cmd->add_option("--clock-bias-std", a.clock_bias_std, "Clock bias std per exchange [s]");
  cmd->add_option("--processing-time", a.processing_time, "Known responder turnaround [s]");
  cmd->add_option("--spectra-out", a.spectra_out, "Also dump trial-0 delay spectra to this CSV");
}

RunConfig make_run_config(const RangingArgs& a) {
  RunConfig cfg;
  cfg.scenario = a.config_file.empty() ? build_scenario(a.scenario) : load_scenario_file(a.config_file);
  cfg.link = parse_link(a.link);
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  cfg.bounds.beta = a.beta;
  cfg.bounds.condition_cutoff = a.cond_cutoff;
  cfg.oversample = a.oversample;
  if (a.peak == "global") {
    cfg.peak_policy = PeakPolicy::global();
  } else if (a.peak == "first") {
    cfg.peak_policy = PeakPolicy::first(a.threshold_db);
  } else {
    throw ConfigError("unknown peak policy '" + a.peak + "'");
  }
  if (a.window == "hamming") {
    cfg.window = WindowKind::Hamming;
  } else if (a.window == "rect") {
    cfg.window = WindowKind::Rectangular;
  } else {
    throw ConfigError("unknown window '" + a.window + "'");
  }
  if (a.pilots == "ones") {
    cfg.pilot_phase = PilotPhase::AllOnes;
  } else if (a.pilots == "random") {
    cfg.pilot_phase = PilotPhase::SeededRandom;
  } else {
    throw ConfigError("unknown pilot mode '" + a.pilots + "'");
  }
  if (a.tx_power_dbm) cfg.ofdm.tx_power = 1e-3 * db_to_linear(*a.tx_power_dbm);
  cfg.doppler_enabled = !a.no_doppler;
  cfg.clock_bias_std = a.clock_bias_std;
  cfg.processing_time = a.processing_time;
  cfg.workers = a.workers;
  cfg.validate();
  return cfg;
}

void emit_points(const std::vector<CurvePoint>& points, const std::string& out) {
  if (out.empty()) {
    write_csv(std::cout, points);
  } else {
    export_csv(points, out);
    std::cerr << "wrote " << points.size() << " rows to " << out << '\n';
  }
}

struct AnchorFile {
  std::vector<Anchor> anchors;
  std::optional<Vec3> truth;
};

AnchorFile read_anchor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open anchor file '" + path + "'");
  AnchorFile f;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    std::string id;
    if (!(is >> id)) continue;
    double x = 0.0, y = 0.0, z = 0.0;
    if (!(is >> x >> y)) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected '<id> x y [z]'");
    }
    if (!(is >> z)) z = 0.0;
    if (id == "truth") {
      f.truth = Vec3(x, y, z);
    } else {
      f.anchors.push_back({Vec3(x, y, z), id});
    }
  }
  return f;
}

Vec3 parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
  if (v.size() < 2 || v.size() > 3) throw ConfigError("point must be 'x,y' or 'x,y,z'");
  return {v[0], v[1], v.size() == 3 ? v[2] : 0.0};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sidelink V2X ranging and positioning toolkit"};
  app.require_subcommand(1);

  int scenario_id = 1;
  bool dump = false;
  std::string scenario_out;
  auto* scenario_cmd = app.add_subcommand("scenario", "Print or save a scenario configuration");
  scenario_cmd->add_option("--id", scenario_id, "Scenario id (1 or 2)");
  scenario_cmd->add_flag("--dump", dump, "Write key=value configuration to stdout");
  scenario_cmd->add_option("--out", scenario_out, "Write key=value configuration to a file");

  RangingArgs ranging;
  auto* ranging_cmd = app.add_subcommand("ranging", "Monte Carlo RTT ranging sweep with bounds");
  add_run_options(ranging_cmd, ranging, true);

  RangingArgs bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "Range-error bounds along a sweep, no Monte Carlo");
  add_run_options(bounds_cmd, bounds, false);

  std::string anchors_file;
  std::string truth_text;
  double sigma = 1.0;
  int pos_trials = 1000;
  std::uint64_t pos_seed = 7;
  int dim = 2;
  auto* position_cmd = app.add_subcommand("position", "Multilateration demo on a synthetic anchor layout");
  position_cmd->add_option("--anchors", anchors_file, "Anchor file: '<id> x y [z]' per line, optional 'truth x y [z]'")
      ->required();
  position_cmd->add_option("--truth", truth_text, "True point 'x,y[,z]' (overrides the file)");
  position_cmd->add_option("--sigma", sigma, "Range noise std [m]");
  position_cmd->add_option("--trials", pos_trials, "Monte Carlo trials");
  position_cmd->add_option("--seed", pos_seed, "Seed");
  position_cmd->add_option("--dim", dim, "2 or 3");

  double vmax = 14.0;
  double accuracy = 3.0;
  auto* check_cmd = app.add_subcommand("check", "Coherence interval and latency budget");
  check_cmd->add_option("--vmax", vmax, "Largest radial velocity [m/s]");
  check_cmd->add_option("--accuracy", accuracy, "Positioning requirement [m]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*scenario_cmd) {
      const ScenarioConfig cfg = build_scenario(scenario_id);
      if (!scenario_out.empty()) {
        std::ofstream out(scenario_out);
        if (!out) throw IoError("cannot open '" + scenario_out + "' for writing");
        write_scenario(out, cfg);
      }
      if (dump || scenario_out.empty()) write_scenario(std::cout, cfg);
    } else if (*ranging_cmd) {
      const RunConfig cfg = make_run_config(ranging);
      emit_points(run_ranging_sweep(cfg), ranging.out);
      if (!ranging.spectra_out.empty()) export_spectra_csv(cfg, ranging.spectra_out);
    } else if (*bounds_cmd) {
      emit_points(run_bound_sweep(make_run_config(bounds)), bounds.out);
    } else if (*position_cmd) {
      AnchorFile file = read_anchor_file(anchors_file);
      if (!truth_text.empty()) file.truth = parse_point(truth_text);
      if (!file.truth) throw ConfigError("no true point: pass --truth or a 'truth' line");
      SolveOptions opts;
      opts.dim = dim;
      opts.known_height = file.truth->z();
      const PositioningSummary s =
          run_positioning_demo(file.anchors, *file.truth, sigma, pos_trials, pos_seed, opts);
      std::printf("layout: synthetic anchor layout (%zu anchors)\n", file.anchors.size());
      std::printf("trials: %d  converged: %d\n", s.trials, s.converged);
      std::printf("rmse_m: %.9g\ncrb_m: %.9g\n", s.rmse, s.crb);
      for (const auto& r : s.requirements) {
        std::printf(
            "%s: accuracy %.9g-%.9g m, confidence %.0f%%-%.0f%% | within %.9g m: %.4f (%s) | "
            "within %.9g m: %.4f (%s) | p%.0f error %.9g m\n",
            std::string(r.set.name).c_str(), r.set.accuracy_lo, r.set.accuracy_hi,
            100 * r.set.confidence_lo, 100 * r.set.confidence_hi, r.set.accuracy_hi,
            r.fraction_relaxed, r.meets_relaxed ? "pass" : "fail", r.set.accuracy_lo,
            r.fraction_strict, r.meets_strict ? "pass" : "fail", 100 * r.set.confidence_lo,
            r.error_percentile);
      }
    } else if (*check_cmd) {
      const CoherenceReport r = coherence_and_latency_check(default_config(), vmax, accuracy);
      if (r.unbounded) {
        std::printf("coherence: unbounded (v_max = 0)\nlatency_budget: unbounded\n");
      } else {
        std::printf("coherence_symbols: %.6g\nnum_symbols: %d\nmargin: %.6g\nlatency_budget_s: %.6g\n",
                    r.coherence_symbols, r.num_symbols, r.margin, r.latency_budget);
      }
    }
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
