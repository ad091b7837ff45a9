"""Convergence reports and their CSV form.

One row per (test-function pair, h) with header

    pair_index,h,sup_error,order_estimate,pass

Numbers are written with 17 significant digits so a report read back
reproduces the stored floats exactly. A row passes when its error is
within the monotone slack of the previous row; the last row of a pair
additionally carries the final-ratio and order checks, so every flag can
be recomputed from the stored errors.
"""

import csv
import io
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .scenario import Tolerances

logger = logging.getLogger(__name__)

CSV_HEADER = ("pair_index", "h", "sup_error", "order_estimate", "pass")

# each halving of the flow resolution removes at least a quarter of the Cauchy difference
FLOW_HALVING_RATIO = 0.75


def estimate_order(errors: Sequence[float], hs: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(h).

    Raises:
        ValueError: Fewer than two points, unequal lengths, or nonpositive values.
    """
    if len(errors) != len(hs) or len(errors) < 2:
        raise ValueError(f"need two or more (error, h) pairs of equal length, got {len(errors)} and {len(hs)}")
    e = np.asarray(errors, dtype=float)
    h = np.asarray(hs, dtype=float)
    if np.any(e <= 0) or np.any(h <= 0):
        raise ValueError("errors and step sizes must be positive")
    slope, _ = np.polyfit(np.log(h), np.log(e), 1)
    return float(slope)


def windowed_order(errors: Sequence[float], hs: Sequence[float], window: int) -> float:
    """estimate_order over the last `window` points, nan when undefined."""
    e, h = list(errors)[-window:], list(hs)[-window:]
    if len(e) < 2 or any(x <= 0 for x in e):
        return math.nan
    return estimate_order(e, h)


@dataclass(frozen=True)
class ReportRow:
    pair_index: int
    h: float
    sup_error: float
    order_estimate: float
    passed: bool


def _fmt(x: float) -> str:
    return format(x, ".17g")


def pair_rows(
    pair_index: int,
    hs: Sequence[float],
    errors: Sequence[float],
    tolerances: Tolerances,
    window: int,
) -> list[ReportRow]:
    """Rows for one pair, with order estimates and pass flags."""
    rows = []
    zero = tolerances.zero_error
    for i, (h, err) in enumerate(zip(hs, errors)):
        order = windowed_order(errors[: i + 1], hs[: i + 1], window)
        ok = math.isfinite(err)
        if i > 0:
            ok &= err <= (1 + tolerances.monotone_slack) * errors[i - 1] + zero
        if i == len(hs) - 1:
            ok &= _final_checks(errors, order, tolerances)
        rows.append(ReportRow(pair_index, float(h), float(err), order, bool(ok)))
    return rows


def _final_checks(errors: Sequence[float], order: float, tolerances: Tolerances) -> bool:
    zero = tolerances.zero_error
    if errors[0] <= zero:
        return all(e <= zero for e in errors)
    if errors[-1] > tolerances.final_ratio * errors[0] + zero:
        return False
    if errors[-1] <= zero:
        return True
    if tolerances.order_min is not None and not (order >= tolerances.order_min):
        return False
    if tolerances.order_max is not None and not (order <= tolerances.order_max):
        return False
    return True


@dataclass
class FlowReport:
    """Resolution-halving Cauchy differences of toy-Fock flow vacuum elements."""

    hs: list[float]
    differences: list[float]

    @property
    def ratios(self) -> list[float]:
        return [b / a if a > 0 else 0.0 for a, b in zip(self.differences, self.differences[1:])]

    def decreasing(self, factor: float = 1.0) -> bool:
        """Each difference is at most factor times the previous one."""
        return all(b <= factor * a + 1e-14 for a, b in zip(self.differences, self.differences[1:]))


@dataclass
class ConvergenceReport:
    """Sup-over-time errors between walk and cocycle matrix elements."""

    scenario: str
    rows: list[ReportRow]
    flow: FlowReport | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        flow_ok = self.flow is None or self.flow.decreasing()
        return all(row.passed for row in self.rows) and flow_ok

    def pairs(self) -> dict[int, list[ReportRow]]:
        grouped: dict[int, list[ReportRow]] = {}
        for row in self.rows:
            grouped.setdefault(row.pair_index, []).append(row)
        return grouped

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_csv().encode("utf-8"))
        logger.info(f"Wrote {len(self.rows)} rows to {path}")

    def summary_lines(self) -> list[str]:
        lines = [f"scenario {self.scenario}: {'PASS' if self.passed else 'FAIL'}"]
        for index, rows in sorted(self.pairs().items()):
            last = rows[-1]
            status = "pass" if all(r.passed for r in rows) else "fail"
            lines.append(
                f"  pair {index}: error {rows[0].sup_error:.3e} -> {last.sup_error:.3e} "
                f"over h {rows[0].h:.3g} -> {last.h:.3g}, order {last.order_estimate:.3f}, {status}"
            )
        if self.flow is not None:
            diffs = ", ".join(f"{d:.3e}" for d in self.flow.differences)
            lines.append(f"  flow Cauchy differences: {diffs}")
        lines.extend(f"  note: {note}" for note in self.notes)
        return lines


def rows_to_csv(rows: Iterable[ReportRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [
                row.pair_index,
                _fmt(row.h),
                _fmt(row.sup_error),
                _fmt(row.order_estimate),
                "true" if row.passed else "false",
            ]
        )
    return buffer.getvalue()


def read_csv(path: str | Path) -> list[ReportRow]:
    """Parse a report written by ConvergenceReport.write_csv.

    Raises:
        ConfigError: The file is unreadable or does not follow the schema.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read report: {exc}", str(path)) from exc
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise ConfigError(f"expected header {','.join(CSV_HEADER)}", str(path))
    rows = []
    for line, record in enumerate(reader, start=2):
        try:
            index, h, err, order, flag = record
            rows.append(ReportRow(int(index), float(h), float(err), float(order), flag == "true"))
        except ValueError as exc:
            raise ConfigError(f"malformed row: {exc}", f"{path}:{line}") from exc
    return rows


def recompute_orders(rows: Sequence[ReportRow], window: int) -> dict[int, float]:
    """Final windowed order estimate per pair."""
    grouped: dict[int, list[ReportRow]] = {}
    for row in rows:
        grouped.setdefault(row.pair_index, []).append(row)
    return {
        index: windowed_order([r.sup_error for r in pair], [r.h for r in pair], window)
        for index, pair in sorted(grouped.items())
    }
