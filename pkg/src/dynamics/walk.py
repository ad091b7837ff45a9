"""Quantum random walks.

Two representations are provided. The exact one builds the walk operator
W_n = G_0 G_1 ... G_{n-1} on h (x) k^{(x) n} (toy Fock space truncated at n
steps). The embedded one evaluates matrix elements of the walk at scale h
against exponential vectors of step functions, which reduces to an ordered
product of d_h x d_h matrices.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..config import config
from ..errors import DimensionError, StructureError, ToyFockCapError
from ..linalg.block import BlockOperator, as_vector, compress, delta_perp, scale_h
from ..linalg.mat import ComplexMatrix, as_matrix, op_norm

logger = logging.getLogger(__name__)

# Relative slack when counting completed steps floor(t/h)
STEP_SNAP = 1e-9


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Right-continuous step function [0, inf) -> C^{d_k}.

    values[j] holds on [breakpoints[j], breakpoints[j+1]); the last value
    holds on [breakpoints[-1], inf). breakpoints[0] must be 0. values has
    one row per breakpoint; a 1-D array is read as d_k = 1.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.atleast_1d(np.asarray(self.breakpoints, dtype=float))
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.ndim == 1:
            # one scalar per breakpoint; vector values need a 2-D array
            vals = vals.reshape(-1, 1)
        if bp.ndim != 1 or bp.size == 0 or bp[0] != 0.0:
            raise ValueError("breakpoints must be a nonempty list starting at 0")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly ascending")
        if vals.ndim != 2 or vals.shape[0] != bp.size:
            raise DimensionError(f"expected {bp.size} values, got array of shape {vals.shape}")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(vals))):
            raise ValueError("step function has non-finite entries")
        bp.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, c) -> "StepFunction":
        return cls(np.array([0.0]), as_vector(c).reshape(1, -1))

    @classmethod
    def zero(cls, dim_k: int) -> "StepFunction":
        return cls(np.array([0.0]), np.zeros((1, dim_k)))

    @property
    def dim_k(self) -> int:
        return self.values.shape[1]

    def evaluate(self, t: float) -> np.ndarray:
        j = int(np.searchsorted(self.breakpoints, t, side="right")) - 1
        return self.values[max(j, 0)]

    def _ends(self) -> np.ndarray:
        return np.append(self.breakpoints[1:], np.inf)

    def integral(self, a: float, b: float) -> np.ndarray:
        """Integral of f over [a, b] by exact interval overlap."""
        overlaps = np.clip(np.minimum(b, self._ends()) - np.maximum(a, self.breakpoints), 0.0, None)
        return overlaps @ self.values

    def breakpoints_in(self, a: float, b: float) -> list[float]:
        """Breakpoints strictly inside (a, b)."""
        return [float(t) for t in self.breakpoints if a < t < b]

    def shifted(self, s: float) -> "StepFunction":
        """u -> f(u + s)."""
        later = self.breakpoints > s
        bp = np.concatenate([[0.0], self.breakpoints[later] - s])
        vals = np.vstack([self.evaluate(s), self.values[later]])
        return StepFunction(bp, vals)

    def mapped(self, J) -> "StepFunction":
        """u -> J f(u), for a matrix J on the noise space."""
        J = as_matrix(J, "J")
        if J.shape[1] != self.dim_k:
            raise DimensionError(f"J has {J.shape[1]} columns, f has noise dimension {self.dim_k}")
        return StepFunction(self.breakpoints, self.values @ J.T)


def inner_integral(f: StepFunction, g: StepFunction, a: float, b: float) -> complex:
    """Integral over [a, b] of <f(s), g(s)>, antilinear in f."""
    if f.dim_k != g.dim_k:
        raise DimensionError(f"noise dimensions differ: {f.dim_k} vs {g.dim_k}")
    if b <= a:
        return 0j
    points = np.union1d(f.breakpoints, g.breakpoints)
    ends = np.append(points[1:], np.inf)
    overlaps = np.clip(np.minimum(b, ends) - np.maximum(a, points), 0.0, None)
    total = 0j
    for start, weight in zip(points, overlaps):
        if weight > 0:
            total += weight * np.vdot(f.evaluate(start), g.evaluate(start))
    return total


def step_average(f: StepFunction, n: int, h: float) -> np.ndarray:
    """f[n, h]: the average of f over [nh, (n+1)h)."""
    if not h > 0:
        raise StructureError(f"h must be positive, got {h}")
    return f.integral(n * h, (n + 1) * h) / h


def completed_steps(t: float, h: float) -> int:
    """floor(t/h), snapping values within STEP_SNAP of an integer upward."""
    if not h > 0:
        raise StructureError(f"h must be positive, got {h}")
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return math.floor(t / h + STEP_SNAP)


def _scaled_increment(G: BlockOperator, h: float) -> BlockOperator:
    return scale_h(G - delta_perp(G.dim_h, G.dim_k), h)


def _step(S: BlockOperator, f: StepFunction, g: StepFunction, n: int, h: float) -> ComplexMatrix:
    return np.eye(S.dim_h) + h * compress(S, step_average(f, n, h), step_average(g, n, h))


def walk_step_matrix(G: BlockOperator, f: StepFunction, g: StepFunction, n: int, h: float) -> ComplexMatrix:
    """I + h E^{f[n,h]^} s_h(G - Delta-perp) E_{g[n,h]^}."""
    return _step(_scaled_increment(G, h), f, g, n, h)


def walk_matrix_element(G: BlockOperator, f: StepFunction, g: StepFunction, h: float, t: float) -> ComplexMatrix:
    """Matrix element of the embedded walk at scale h between e(f) and e(g) at time t."""
    return walk_matrix_elements(G, f, g, h, [t])[0]


def walk_matrix_elements(
    G: BlockOperator, f: StepFunction, g: StepFunction, h: float, times: Sequence[float]
) -> list[ComplexMatrix]:
    """walk_matrix_element at each of times, sharing the step products."""
    S = _scaled_increment(G, h)
    order = sorted(range(len(times)), key=lambda i: times[i])
    results: list[ComplexMatrix | None] = [None] * len(times)
    product = np.eye(G.dim_h, dtype=np.complex128)
    done = 0
    for i in order:
        t = times[i]
        steps = completed_steps(t, h)
        while done < steps:
            product = product @ _step(S, f, g, done, h)
            done += 1
        tail = inner_integral(f, g, steps * h, t)
        results[i] = product * np.exp(tail)
    return results


@dataclass(frozen=True, eq=False)
class ToyFockOperator:
    """Operator on h (x) k^{(x) n}, h-index major, k^ factors in time order."""

    dim_h: int
    dim_k: int
    n_steps: int
    matrix: ComplexMatrix

    def __post_init__(self):
        expected = self.dim_h * (1 + self.dim_k) ** self.n_steps
        if self.matrix.shape != (expected, expected):
            raise DimensionError(f"toy Fock matrix has shape {self.matrix.shape}, expected {expected}")

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def norm(self) -> float:
        return op_norm(self.matrix)

    def vacuum_element(self) -> ComplexMatrix:
        """Compression to h (x) (vacuum)^{(x) n}."""
        fock = (1 + self.dim_k) ** self.n_steps
        return self.matrix.reshape(self.dim_h, fock, self.dim_h, fock)[:, 0, :, 0]


def _require_cap(dim_h: int, dim_k: int, n: int) -> int:
    if n < 0:
        raise ValueError(f"step count must be nonnegative, got {n}")
    size = dim_h * (1 + dim_k) ** n
    if size > config.toyfock_cap:
        raise ToyFockCapError(
            f"toy Fock dimension {size} for n={n} exceeds cap {config.toyfock_cap} (QWC_TOYFOCK_CAP)"
        )
    return size


def toyfock_walk(G: BlockOperator, n: int) -> ToyFockOperator:
    """W_n = G_0 G_1 ... G_{n-1}, G_i acting on h and the i-th k^ factor."""
    size = _require_cap(G.dim_h, G.dim_k, n)
    K = 1 + G.dim_k
    d = G.dim_h
    logger.debug(f"Building toy Fock walk: n={n}, dimension {size}")
    Gt = G.to_kron().reshape(d, K, d, K)
    W = np.eye(size, dtype=np.complex128)
    for i in range(n):
        tensor = W.reshape((size, d) + (K,) * n)
        # right-multiply by G_i: contract column axes (h, k_i) with the input axes of G
        moved = np.tensordot(tensor, Gt, axes=([1, 2 + i], [0, 1]))
        tensor = np.moveaxis(moved, [-2, -1], [1, 2 + i])
        W = tensor.reshape(size, size)
    return ToyFockOperator(d, G.dim_k, n, W)


def toyfock_flow(G: BlockOperator, x, n: int) -> ToyFockOperator:
    """j_n(x) = W_n (x (x) I) W_n*."""
    x = as_matrix(x, "x")
    if x.shape != (G.dim_h, G.dim_h):
        raise DimensionError(f"x has shape {x.shape}, expected {(G.dim_h, G.dim_h)}")
    W = toyfock_walk(G, n)
    fock = (1 + G.dim_k) ** n
    amplified = np.kron(x, np.eye(fock))
    return ToyFockOperator(G.dim_h, G.dim_k, n, W.matrix @ amplified @ W.matrix.conj().T)
