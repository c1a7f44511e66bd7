"""Simulation-backed causal inference for epidemic-era policy evaluation."""

__version__ = "0.1.0"

from .sird import SirdParams, SirdPath, SirdState, expected_new_cases, simulate_path, step
from .scenario import (
    EconParams,
    NEVER_TREATED,
    Panel,
    ScenarioConfig,
    build_panel,
    export_panel_csv,
    import_panel_csv,
    load_config,
    save_config,
)
from .estimate import ALL_ESTIMATORS, EstimatorOptions, estimate_series
from .inference import AttSeries, attach_inference, multiplier_bootstrap, test_zero
from .aggregation import GroupTimeGrid, event_study, group_time_att, overall_att
from .montecarlo import McReport, run_scenario, table_suite

__all__ = [
    "ALL_ESTIMATORS",
    "AttSeries",
    "EconParams",
    "EstimatorOptions",
    "GroupTimeGrid",
    "McReport",
    "NEVER_TREATED",
    "Panel",
    "ScenarioConfig",
    "SirdParams",
    "SirdPath",
    "SirdState",
    "attach_inference",
    "build_panel",
    "estimate_series",
    "event_study",
    "expected_new_cases",
    "export_panel_csv",
    "group_time_att",
    "import_panel_csv",
    "load_config",
    "multiplier_bootstrap",
    "overall_att",
    "run_scenario",
    "save_config",
    "simulate_path",
    "step",
    "table_suite",
    "test_zero",
]
