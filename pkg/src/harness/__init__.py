"""Convergence experiments: scenarios, sweeps, reports and the self-test."""

from .report import ConvergenceReport, FlowReport, ReportRow, estimate_order, read_csv, recompute_orders
from .runner import flow_cauchy_check, run_scenario, sup_error
from .scenario import ScenarioConfig, Tolerances
from .selftest import CheckResult, run_selftest

__all__ = [
    "CheckResult",
    "ConvergenceReport",
    "FlowReport",
    "ReportRow",
    "ScenarioConfig",
    "Tolerances",
    "estimate_order",
    "flow_cauchy_check",
    "read_csv",
    "recompute_orders",
    "run_scenario",
    "run_selftest",
    "sup_error",
]
