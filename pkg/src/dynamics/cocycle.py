"""Limit cocycles through the semigroup decomposition.

For step functions f, g the matrix element of X_t between e(f) and e(g)
factorises exactly into a time-ordered product of semigroups, one per
interval on which f and g are constant:

    X^{f,g}_t = P^{f(t0), g(t0)}_{t1 - t0} ... P^{f(tn), g(tn)}_{t - tn}

with P^{c,d} generated by E^{c^} (F + Delta) E_{d^}.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError
from ..linalg.block import BlockOperator, as_vector, compress, embed_noise_compress, require_isometry
from ..linalg.mat import ComplexMatrix, as_matrix, mat_exp, op_norm
from .walk import StepFunction, completed_steps, walk_matrix_element

logger = logging.getLogger(__name__)


def semigroup_generator(F: BlockOperator, c, d) -> ComplexMatrix:
    """E^{c^} F E_{d^} + <c, d> I."""
    cvec = as_vector(c, F.dim_k)
    dvec = as_vector(d, F.dim_k)
    return compress(F, cvec, dvec) + np.vdot(cvec, dvec) * np.eye(F.dim_h)


@dataclass(frozen=True, eq=False)
class SemigroupGen:
    """Generator of the associated semigroup P^{c,d}."""

    generator: ComplexMatrix
    c: np.ndarray
    d: np.ndarray

    @classmethod
    def of(cls, F: BlockOperator, c, d) -> "SemigroupGen":
        return cls(semigroup_generator(F, c, d), as_vector(c), as_vector(d))

    def at(self, t: float) -> ComplexMatrix:
        return mat_exp(t * self.generator)


def vacuum_semigroup(F: BlockOperator, t: float) -> ComplexMatrix:
    """e^{tA}, the vacuum expectation semigroup."""
    return mat_exp(t * F.A)


def time_partition(f: StepFunction, g: StepFunction, t: float) -> list[float]:
    """0, the breakpoints of f and g inside (0, t), and t."""
    inner = sorted(set(f.breakpoints_in(0.0, t)) | set(g.breakpoints_in(0.0, t)))
    return [0.0, *inner, t] if t > 0 else [0.0]


def cocycle_matrix_element(F: BlockOperator, f: StepFunction, g: StepFunction, t: float) -> ComplexMatrix:
    """<e(f), X_t e(g)> as an operator on the initial space."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    _require_noise(F, f, g)
    points = time_partition(f, g, t)
    result = np.eye(F.dim_h, dtype=np.complex128)
    for start, end in zip(points, points[1:]):
        K = semigroup_generator(F, f.evaluate(start), g.evaluate(start))
        result = result @ mat_exp((end - start) * K)
    return result


def cocycle_matrix_elements(
    F: BlockOperator, f: StepFunction, g: StepFunction, times: Sequence[float]
) -> list[ComplexMatrix]:
    """cocycle_matrix_element at each of times, sharing the completed intervals."""
    _require_noise(F, f, g)
    if any(t < 0 for t in times):
        raise ValueError("times must be nonnegative")
    breaks = sorted(set(f.breakpoints_in(0.0, np.inf)) | set(g.breakpoints_in(0.0, np.inf)))
    order = sorted(range(len(times)), key=lambda i: times[i])
    results: list[ComplexMatrix | None] = [None] * len(times)
    product = np.eye(F.dim_h, dtype=np.complex128)
    last = 0.0
    generators: dict[float, ComplexMatrix] = {}

    def generator_from(s: float) -> ComplexMatrix:
        if s not in generators:
            generators[s] = semigroup_generator(F, f.evaluate(s), g.evaluate(s))
        return generators[s]

    next_break = 0
    for i in order:
        t = times[i]
        while next_break < len(breaks) and breaks[next_break] < t:
            b = breaks[next_break]
            product = product @ mat_exp((b - last) * generator_from(last))
            last = b
            next_break += 1
        results[i] = product @ mat_exp((t - last) * generator_from(last))
    return results


def _require_noise(F: BlockOperator, f: StepFunction, g: StepFunction) -> None:
    if f.dim_k != F.dim_k or g.dim_k != F.dim_k:
        raise DimensionError(
            f"test functions have noise dimensions ({f.dim_k}, {g.dim_k}), generator has {F.dim_k}"
        )


def euler_compare(
    a_target,
    a_of_h: Callable[[float], ComplexMatrix],
    h: float,
    r: float,
    t: float,
) -> float:
    """|(I + h a(h))^{floor(t/h) - floor(r/h)} - e^{(t - r) a}|."""
    if not 0 <= r <= t:
        raise ValueError(f"need 0 <= r <= t, got r={r}, t={t}")
    a = as_matrix(a_target, "a")
    n = completed_steps(t, h) - completed_steps(r, h)
    step = np.eye(a.shape[0]) + h * as_matrix(a_of_h(h), "a(h)")
    return op_norm(np.linalg.matrix_power(step, n) - mat_exp((t - r) * a))


def jgj_matrix_element_check(
    F_big: BlockOperator,
    J,
    f: StepFunction,
    g: StepFunction,
    t: float,
    h: float | None = None,
) -> float:
    """Distance between elements of the J-compressed generator at (f, g) and of F_big at (Jf, Jg).

    With h given, F_big is read as a walk generator and the embedded walk
    elements at scale h are compared instead of cocycle elements.
    """
    J = require_isometry(J)
    F_small = embed_noise_compress(F_big, J)
    Jf, Jg = f.mapped(J), g.mapped(J)
    if h is None:
        small = cocycle_matrix_element(F_small, f, g, t)
        big = cocycle_matrix_element(F_big, Jf, Jg, t)
    else:
        small = walk_matrix_element(F_small, f, g, h, t)
        big = walk_matrix_element(F_big, Jf, Jg, h, t)
    return op_norm(small - big)


def time_grid(h: float, T: float, f: StepFunction, g: StepFunction, extra: int = 0) -> np.ndarray:
    """Multiples of h in [0, T], breakpoints of f and g in [0, T], T itself, and extra uniform points."""
    steps = completed_steps(T, h)
    points = [min(k * h, T) for k in range(steps + 1)]
    points.extend(float(b) for b in f.breakpoints if b <= T)
    points.extend(float(b) for b in g.breakpoints if b <= T)
    points.append(T)
    if extra > 0:
        points.extend(np.linspace(0.0, T, extra + 2)[1:-1])
    return np.unique(np.asarray(points, dtype=float))
