# SPDX-License-Identifier: Apache-2.0
"""Sidelink OFDM ranging bounds, estimators and positioning (C++ core)."""

from ._core import (
    BoundReport,
    CoherenceReport,
    CurvePoint,
    OfdmConfig,
    PathComponent,
    PathKind,
    PositioningSummary,
    RunConfig,
    ScenarioConfig,
    build_scenario,
    coherence_and_latency_check,
    default_config,
    hamming_window,
    reb_waa,
    rtt_range,
    run_bound_sweep,
    run_positioning_demo,
    run_ranging_sweep,
    trace_paths,
    write_csv,
)

__all__ = [
    "BoundReport",
    "CoherenceReport",
    "CurvePoint",
    "OfdmConfig",
    "PathComponent",
    "PathKind",
    "PositioningSummary",
    "RunConfig",
    "ScenarioConfig",
    "build_scenario",
    "coherence_and_latency_check",
    "default_config",
    "hamming_window",
    "reb_waa",
    "rtt_range",
    "run_bound_sweep",
    "run_positioning_demo",
    "run_ranging_sweep",
    "trace_paths",
    "write_csv",
]
