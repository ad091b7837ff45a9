"""Sweep a generator family over h and compare walks with their limit cocycle."""

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..config import config
from ..dynamics.cocycle import cocycle_matrix_elements, time_grid
from ..dynamics.walk import StepFunction, completed_steps, toyfock_flow, walk_matrix_elements
from ..linalg.mat import op_norm
from ..models.families import GeneratorFamily
from .report import ConvergenceReport, FlowReport, pair_rows
from .scenario import ScenarioConfig

logger = logging.getLogger(__name__)


def sup_error(
    family: GeneratorFamily,
    f: StepFunction,
    g: StepFunction,
    h: float,
    T: float,
    extra: int = 0,
) -> float:
    """max over the time grid of |walk element at scale h - cocycle element|."""
    times = list(time_grid(h, T, f, g, extra))
    walk = walk_matrix_elements(family(h), f, g, h, times)
    limit = cocycle_matrix_elements(family.limit, f, g, times)
    return max(op_norm(a - b) for a, b in zip(walk, limit))


def run_scenario(cfg: ScenarioConfig, threads: int | None = None) -> ConvergenceReport:
    """Errors for every (pair, h) cell, with order estimates and pass flags.

    Cells are independent and may be evaluated on a thread pool; results
    are assembled in (pair, h) order so the report does not depend on
    scheduling.
    """
    threads = config.threads if threads is None else threads
    family = cfg.build_family()
    cells = [(i, h) for i in range(len(cfg.test_functions)) for h in cfg.h_grid]
    logger.info(f"Running {cfg.name}: {len(cells)} cells on {threads} thread(s)")

    def evaluate(cell: tuple[int, float]) -> float:
        index, h = cell
        f, g = cfg.test_functions[index]
        error = sup_error(family, f, g, h, cfg.T, cfg.time_grid_extra)
        logger.debug(f"pair {index} h={h:.6g}: sup error {error:.6e}")
        return error

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            errors = list(pool.map(evaluate, cells))
    else:
        errors = [evaluate(cell) for cell in cells]
    by_cell = dict(zip(cells, errors))

    rows = []
    for index in range(len(cfg.test_functions)):
        pair_errors = [by_cell[(index, h)] for h in cfg.h_grid]
        rows.extend(pair_rows(index, cfg.h_grid, pair_errors, cfg.tolerances, config.order_window))

    report = ConvergenceReport(cfg.name, rows)
    if cfg.flow is not None:
        report.flow = flow_cauchy_check(family, cfg.flow.x, cfg.flow.T, cfg.flow.h_grid)
    if not report.passed:
        logger.warning(f"Scenario {cfg.name} failed its convergence checks")
    return report


def flow_vacuum_element(family: GeneratorFamily, x, T: float, h: float) -> np.ndarray:
    """Vacuum compression of j_n(x) for the walk at scale h with n = floor(T/h) steps."""
    n = completed_steps(T, h)
    return toyfock_flow(family(h), x, n).vacuum_element()


def flow_cauchy_check(family: GeneratorFamily, x, T: float, hs: Sequence[float]) -> FlowReport:
    """Distances between flow vacuum elements at consecutive resolutions.

    Raises:
        ToyFockCapError: Some T/h exceeds what the toy Fock cap allows.
    """
    if len(hs) < 2:
        raise ValueError("need at least two resolutions")
    elements = [flow_vacuum_element(family, x, T, h) for h in hs]
    differences = [op_norm(b - a) for a, b in zip(elements, elements[1:])]
    return FlowReport(list(hs), differences)
