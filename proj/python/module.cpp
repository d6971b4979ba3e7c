// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slpos/bounds.hpp"
#include "slpos/estimation.hpp"
#include "slpos/harness.hpp"
#include "slpos/positioning.hpp"
#include "slpos/propagation.hpp"
#include "slpos/signal.hpp"

namespace py = pybind11;
using namespace slpos;

namespace {

ChannelSnapshot as_channel(const std::vector<PathComponent>& paths) {
  ChannelSnapshot ch;
  ch.paths = paths;
  return ch;
}

std::vector<Anchor> as_anchors(const std::vector<Vec3>& positions) {
  std::vector<Anchor> out;
  for (std::size_t i = 0; i < positions.size(); ++i) out.push_back({positions[i], std::to_string(i)});
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "slpos C++ core";
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  py::enum_<PathKind>(m, "PathKind")
      .value("LoS", PathKind::LoS)
      .value("Ground", PathKind::Ground)
      .value("Wall", PathKind::Wall);

  py::class_<OfdmConfig>(m, "OfdmConfig")
      .def(py::init<>())
      .def_readwrite("num_subcarriers", &OfdmConfig::num_subcarriers)
      .def_readwrite("subcarrier_spacing", &OfdmConfig::subcarrier_spacing)
      .def_readwrite("num_symbols", &OfdmConfig::num_symbols)
      .def_readwrite("symbol_duration", &OfdmConfig::symbol_duration)
      .def_readwrite("carrier_freq", &OfdmConfig::carrier_freq)
      .def_readwrite("tx_power", &OfdmConfig::tx_power)
      .def_readwrite("noise_psd", &OfdmConfig::noise_psd)
      .def_readwrite("noise_figure_db", &OfdmConfig::noise_figure_db)
      .def_property_readonly("wavelength", &OfdmConfig::wavelength)
      .def_property_readonly("bandwidth", &OfdmConfig::bandwidth)
      .def("validate", &OfdmConfig::validate);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def_readonly("scenario_id", &ScenarioConfig::scenario_id)
      .def_property_readonly("rsu_position",
                             [](const ScenarioConfig& s) -> std::optional<Vec3> {
                               if (!s.rsu) return std::nullopt;
                               return s.rsu->position;
                             })
      .def_readwrite("vehicle_start", &ScenarioConfig::vehicle_start)
      .def_readwrite("bicycle_start", &ScenarioConfig::bicycle_start)
      .def_readwrite("vehicle_speed", &ScenarioConfig::vehicle_speed)
      .def_readwrite("bicycle_speed", &ScenarioConfig::bicycle_speed)
      .def_readwrite("measurement_interval", &ScenarioConfig::measurement_interval)
      .def_readwrite("ground_reflection_coeff", &ScenarioConfig::ground_reflection_coeff)
      .def_readwrite("wall_reflection_coeff", &ScenarioConfig::wall_reflection_coeff)
      .def_property_readonly("num_buildings", [](const ScenarioConfig& s) { return s.buildings.size(); })
      .def("__str__", [](const ScenarioConfig& s) {
        std::ostringstream os;
        write_scenario(os, s);
        return os.str();
      });

  py::class_<PathComponent>(m, "PathComponent")
      .def(py::init([](double delay, cd gain, PathKind kind) {
             PathComponent p;
             p.delay = delay;
             p.gain = gain;
             p.kind = kind;
             return p;
           }),
           py::arg("delay"), py::arg("gain"), py::arg("kind") = PathKind::Wall)
      .def_readwrite("delay", &PathComponent::delay)
      .def_readwrite("gain", &PathComponent::gain)
      .def_readwrite("radial_velocity", &PathComponent::radial_velocity)
      .def_readwrite("kind", &PathComponent::kind);

  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("reb_los_only", &BoundReport::reb_los_only)
      .def_readonly("reb_all_paths", &BoundReport::reb_all_paths)
      .def_readonly("reb_waa", &BoundReport::reb_waa)
      .def_readonly("merged_toa", &BoundReport::merged_toa)
      .def_readonly("waa_bias", &BoundReport::waa_bias)
      .def_readonly("cell_indices", &BoundReport::cell_indices)
      .def_readonly("weights", &BoundReport::weights)
      .def_readonly("merged_gain", &BoundReport::merged_gain)
      .def_readonly("destructive_interference", &BoundReport::destructive_interference);

  py::class_<CurvePoint>(m, "CurvePoint")
      .def_readonly("sweep_coord", &CurvePoint::sweep_coord)
      .def_readonly("true_range", &CurvePoint::true_range)
      .def_readonly("rmse", &CurvePoint::rmse)
      .def_readonly("reb_los", &CurvePoint::reb_los)
      .def_readonly("reb_all", &CurvePoint::reb_all)
      .def_readonly("reb_waa", &CurvePoint::reb_waa)
      .def_readonly("waa_bias", &CurvePoint::waa_bias)
      .def_readonly("n_paths", &CurvePoint::n_paths)
      .def_readonly("n_cell_paths", &CurvePoint::n_cell_paths)
      .def_readonly("los_present", &CurvePoint::los_present);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init([](int scenario, const std::string& link, int trials, std::uint64_t seed) {
             RunConfig cfg;
             cfg.scenario = build_scenario(scenario);
             cfg.link = parse_link(link);
             cfg.trials = trials;
             cfg.seed = seed;
             return cfg;
           }),
           py::arg("scenario") = 1, py::arg("link") = "rsu-vehicle", py::arg("trials") = 100,
           py::arg("seed") = 42)
      .def_readwrite("scenario", &RunConfig::scenario)
      .def_readwrite("ofdm", &RunConfig::ofdm)
      .def_readwrite("trials", &RunConfig::trials)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("workers", &RunConfig::workers)
      .def_readwrite("oversample", &RunConfig::oversample)
      .def_readwrite("clock_bias_std", &RunConfig::clock_bias_std)
      .def_readwrite("processing_time", &RunConfig::processing_time)
      .def_readwrite("doppler_enabled", &RunConfig::doppler_enabled)
      .def_property(
          "beta", [](const RunConfig& c) { return c.bounds.beta; },
          [](RunConfig& c, double b) { c.bounds.beta = b; })
      .def_property_readonly("link", [](const RunConfig& c) { return to_string(c.link); });

  py::class_<RequirementResult>(m, "RequirementResult")
      .def_property_readonly("name", [](const RequirementResult& r) { return std::string(r.set.name); })
      .def_readonly("fraction_relaxed", &RequirementResult::fraction_relaxed)
      .def_readonly("meets_relaxed", &RequirementResult::meets_relaxed)
      .def_readonly("fraction_strict", &RequirementResult::fraction_strict)
      .def_readonly("meets_strict", &RequirementResult::meets_strict)
      .def_readonly("error_percentile", &RequirementResult::error_percentile);

  py::class_<PositioningSummary>(m, "PositioningSummary")
      .def_readonly("rmse", &PositioningSummary::rmse)
      .def_readonly("crb", &PositioningSummary::crb)
      .def_readonly("trials", &PositioningSummary::trials)
      .def_readonly("converged", &PositioningSummary::converged)
      .def_readonly("requirements", &PositioningSummary::requirements);

  py::class_<CoherenceReport>(m, "CoherenceReport")
      .def_readonly("unbounded", &CoherenceReport::unbounded)
      .def_readonly("coherence_symbols", &CoherenceReport::coherence_symbols)
      .def_readonly("num_symbols", &CoherenceReport::num_symbols)
      .def_readonly("margin", &CoherenceReport::margin)
      .def_readonly("latency_budget", &CoherenceReport::latency_budget);

  m.def("default_config", &default_config);
  m.def("build_scenario", &build_scenario, py::arg("scenario_id"));
  m.def(
      "trace_paths",
      [](const Vec3& tx, const Vec3& rx, const ScenarioConfig& cfg) {
        return trace_paths(Pose{tx, Vec3::Zero()}, Pose{rx, Vec3::Zero()}, cfg).paths;
      },
      py::arg("tx"), py::arg("rx"), py::arg("scenario"), "Paths between two static points, sorted by delay.");
  m.def(
      "reb_waa",
      [](const std::vector<PathComponent>& paths, const OfdmConfig& cfg, double beta) {
        BoundOptions o;
        o.beta = beta;
        return reb_waa(as_channel(paths), make_pilots(cfg), cfg, o);
      },
      py::arg("paths"), py::arg("config") = default_config(), py::arg("beta") = 1.5,
      "All three range-error bounds in metres; the first path must be the LoS path.");
  m.def("hamming_window", &hamming_window, py::arg("n"));
  m.def(
      "rtt_range",
      [](double fwd, double rev, double proc, double var, double period) {
        const auto r = rtt_range(fwd, rev, proc, var, period);
        return py::make_tuple(r.distance, r.sigma, r.clock_bias_model);
      },
      py::arg("toa_fwd"), py::arg("toa_rev"), py::arg("processing_time") = 0.0,
      py::arg("one_way_variance") = 1.0, py::arg("ambiguity_period") = 0.0,
      "Returns (distance_m, sigma_m, clock_bias_s).");
  m.def("run_ranging_sweep", &run_ranging_sweep, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("run_bound_sweep", &run_bound_sweep, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "write_csv",
      [](const std::vector<CurvePoint>& pts) {
        std::ostringstream os;
        write_csv(os, pts);
        return os.str();
      },
      py::arg("points"));
  m.def(
      "run_positioning_demo",
      [](const std::vector<Vec3>& anchors, const Vec3& truth, double sigma, int trials, std::uint64_t seed,
         int dim) {
        SolveOptions o;
        o.dim = dim;
        o.known_height = truth.z();
        return run_positioning_demo(as_anchors(anchors), truth, sigma, trials, seed, o);
      },
      py::arg("anchors"), py::arg("truth"), py::arg("sigma"), py::arg("trials") = 1000, py::arg("seed") = 42,
      py::arg("dim") = 2);
  m.def("coherence_and_latency_check", &coherence_and_latency_check, py::arg("config"), py::arg("v_max"),
        py::arg("accuracy"));
}
