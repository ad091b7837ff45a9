"""The Holevo transform F[Q] and the scalar functions behind it.

F[Q] = tau^{-1}(e^{tau(Q)} - I), where tau places the blocks of Q in a
strictly upper-triangular 3x3 block matrix. In block terms

    F[Q] = [[A + C e2(D) B, C e1(D)], [e1(D) B, e0(D) - I]].

Skewadjoint Q is sent to generators of unitary cocycles, and the
parameterisations Q_{A,B,D} <-> F_{Z,L,W} convert between the two sides.
"""

import cmath
import logging
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ..config import config
from ..errors import DimensionError, MatrixError, StructureError
from ..linalg.block import BlockOperator, scale_h
from ..linalg.mat import ComplexMatrix, adjoint, as_matrix, mat_exp, op_norm, phi_funcs
from .ito import GeneratorParams, series_product

logger = logging.getLogger(__name__)

UNITARY_TOLERANCE = 1e-8
SKEW_TOLERANCE = 1e-8
NORMALITY_TOLERANCE = 1e-9

_SERIES_RADIUS = 1.0
_SERIES_TERMS = 30


# Scalar functions -----------------------------------------------------------


def e0(z: complex) -> complex:
    return cmath.exp(z)


def e1(z: complex) -> complex:
    """(e^z - 1)/z, entire."""
    if abs(z) < _SERIES_RADIUS:
        return _series(z, 1)
    return (cmath.exp(z) - 1) / z


def e2(z: complex) -> complex:
    """(e^z - 1 - z)/z^2, entire."""
    if abs(z) < _SERIES_RADIUS:
        return _series(z, 2)
    return (cmath.exp(z) - 1 - z) / (z * z)


def e_odd(z: complex) -> complex:
    """(sinh z - z)/z^2, the odd entire function e."""
    if abs(z) < _SERIES_RADIUS:
        total = 0j
        for j in reversed(range(_SERIES_TERMS // 2)):
            total = total * z * z + 1 / math.factorial(2 * j + 3)
        return total * z
    return (cmath.sinh(z) - z) / (z * z)


def _series(z: complex, shift: int) -> complex:
    """sum_k z^k / (k + shift)!"""
    total = 0j
    for k in reversed(range(_SERIES_TERMS)):
        total = total * z + 1 / math.factorial(k + shift)
    return total


def _sin_minus_identity(t: float) -> float:
    """sin t - t, summed as a series for |t| < 1."""
    if abs(t) >= 1:
        return math.sin(t) - t
    total = 0.0
    for k in reversed(range(1, 12)):
        total = total * t * t + (-1) ** k / math.factorial(2 * k + 1)
    return total * t**3


def e_a(t: float) -> complex:
    """(i/2)(sin t - t)/(cos t - 1) on [0, 2 pi), continuous at 0."""
    if abs(t) < config.scalar_zero_threshold:
        return 0j
    if abs(t) < config.scalar_taylor_threshold:
        return 1j * (t / 6 + t**3 / 180 + t**5 / 5040)
    # cos t - 1 = -2 sin^2(t/2)
    return 0.5j * _sin_minus_identity(t) / (-2 * math.sin(t / 2) ** 2)


def e_b(t: float) -> complex:
    """it/(e^{it} - 1) on [0, 2 pi), continuous at 0."""
    if abs(t) < config.scalar_zero_threshold:
        return 1 + 0j
    if abs(t) < config.scalar_taylor_threshold:
        return 1 - 0.5j * t - t**2 / 12 - t**4 / 720
    # e^{it} - 1 = 2i sin(t/2) e^{it/2}
    return (t / 2) / math.sin(t / 2) * cmath.exp(-0.5j * t)


def p_coefficients(n: int) -> list[float]:
    """Coefficients of ((1 + z/n)^n - 1 - z)/z^2 in ascending powers."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return [math.comb(n, k) / n**k for k in range(2, n + 1)]


def p_n(z: complex, n: int) -> complex:
    """The polynomial p_n.

    Horner's rule on the binomial coefficients inside the unit disk and the
    closed form ((1 + z/n)^n - 1 - z)/z^2 outside it. Horner's partial sums
    grow like (1 + |z|/n)^n, far beyond |p_n(z)| for large z.
    """
    coefficients = p_coefficients(n)
    if abs(z) >= _SERIES_RADIUS:
        return ((1 + z / n) ** n - 1 - z) / (z * z)
    total = 0j
    for c in reversed(coefficients):
        total = total * z + c
    return total


# Parameterisations ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QParams:
    """Blocks of Q_{A,B,D} = [[A, -B*], [B, D]]."""

    A: ComplexMatrix
    B: ComplexMatrix
    D: ComplexMatrix

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        B = as_matrix(self.B, "B")
        D = as_matrix(self.D, "D")
        if B.shape != (D.shape[0], A.shape[0]):
            raise DimensionError(f"B has shape {B.shape}, expected {(D.shape[0], A.shape[0])}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "D", D)

    def assemble(self) -> BlockOperator:
        return BlockOperator.from_blocks(self.A, self.B, -adjoint(self.B), self.D)


def holevo_transform(Q: BlockOperator) -> BlockOperator:
    """F[Q] in closed form via the matrix phi-functions of D."""
    phi = phi_funcs(Q.D)
    return BlockOperator.from_blocks(
        Q.A + Q.C @ phi.e2 @ Q.B,
        phi.e1 @ Q.B,
        Q.C @ phi.e1,
        phi.e0 - np.eye(Q.D.shape[0]),
    )


def tau_exp_oracle(Q: BlockOperator) -> BlockOperator:
    """F[Q] by exponentiating tau(Q) = [[0, C, A], [0, D, B], [0, 0, 0]]."""
    d = Q.dim_h
    m = Q.D.shape[0]
    n = 2 * d + m
    tau = np.zeros((n, n), dtype=np.complex128)
    tau[:d, d : d + m] = Q.C
    tau[:d, d + m :] = Q.A
    tau[d : d + m, d : d + m] = Q.D
    tau[d : d + m, d + m :] = Q.B
    X = mat_exp(tau) - np.eye(n)
    return BlockOperator.from_blocks(
        X[:d, d + m :],
        X[d : d + m, d + m :],
        X[:d, d : d + m],
        X[d : d + m, d : d + m],
    )


def unitary_spectrum(W) -> tuple[np.ndarray, ComplexMatrix]:
    """Eigenphases in [0, 2 pi) and a unitary eigenbasis of a unitary W.

    W is normal, so its complex Schur form is diagonal.
    """
    W = as_matrix(W, "W")
    eye = np.eye(W.shape[0])
    defect = op_norm(adjoint(W) @ W - eye)
    if defect > UNITARY_TOLERANCE:
        raise StructureError(f"W is not unitary (defect {defect:.3e})")
    T, U = scipy.linalg.schur(W, output="complex")
    off_diagonal = op_norm(T - np.diag(np.diag(T)))
    if off_diagonal > NORMALITY_TOLERANCE * max(1.0, op_norm(W)):
        raise MatrixError(f"numerical eigenstructure of W is defective (residual {off_diagonal:.3e})")
    phases = np.mod(np.angle(np.diag(T)), 2 * np.pi)
    phases[phases > 2 * np.pi - config.phase_wrap] = 0.0
    return phases, U


def unitary_log(W) -> ComplexMatrix:
    """The selfadjoint R with e^{iR} = W and spectrum in [0, 2 pi)."""
    phases, U = unitary_spectrum(W)
    return (U * phases) @ adjoint(U)


def q_from_unitary_params(p: GeneratorParams) -> QParams:
    """Q_{A,B,D} with F[Q_{A,B,D}] = F_{Z,L,W}, for unitary W."""
    phases, U = unitary_spectrum(p.W)
    ea = (U * np.array([e_a(t) for t in phases])) @ adjoint(U)
    eb = (U * np.array([e_b(t) for t in phases])) @ adjoint(U)
    R = (U * phases) @ adjoint(U)
    return QParams(
        A=p.Z + adjoint(p.L) @ ea @ p.L,
        B=eb @ p.L,
        D=1j * R,
    )


def f_from_skew_params(q: QParams) -> GeneratorParams:
    """(Z, L, W) with F[Q_{A,B,D}] = F_{Z,L,W}, for skewadjoint D."""
    defect = op_norm(q.D + adjoint(q.D))
    if defect > SKEW_TOLERANCE:
        raise StructureError(f"D is not skewadjoint (defect {defect:.3e})")
    phi = phi_funcs(q.D)
    return GeneratorParams(
        Z=q.A - adjoint(q.B) @ phi.e @ q.B,
        L=phi.e1 @ q.B,
        W=phi.e0,
    )


# Scaled limits --------------------------------------------------------------


@dataclass(frozen=True)
class LimitPoint:
    """Named errors at one (h, n) sample."""

    h: float
    n: int | None = None
    errors: dict[str, float] = field(default_factory=dict)


def _identity_like(Q: BlockOperator) -> BlockOperator:
    return BlockOperator.identity(Q.dim_h, Q.dim_k)


def _exp(Q: BlockOperator) -> BlockOperator:
    return Q.with_matrix(mat_exp(Q.matrix))


def scaled_power_limit_check(
    P: Callable[[float, int], BlockOperator],
    Q: BlockOperator,
    grid: Sequence[tuple[float, int]],
) -> list[LimitPoint]:
    """Errors of n s_h(P(h,n) - I) -> Q and s_h(P(h,n)^n - I) -> F[Q]."""
    if not grid:
        raise ValueError("grid must be nonempty")
    target = holevo_transform(Q)
    eye = _identity_like(Q)
    points = []
    for h, n in grid:
        Phn = P(h, n)
        hypothesis = (n * scale_h(Phn - eye, h)).distance(Q)
        power = Phn.with_matrix(np.linalg.matrix_power(Phn.matrix, n))
        limit = scale_h(power - eye, h).distance(target)
        points.append(LimitPoint(h=h, n=n, errors={"hypothesis": hypothesis, "limit": limit}))
    return points


def exp_dissipative_limit(
    Qh: Callable[[float], BlockOperator], Q: BlockOperator, hs: Iterable[float]
) -> list[LimitPoint]:
    """Errors of s_h(e^{Q_h} - I) -> F[Q]."""
    target = holevo_transform(Q)
    eye = _identity_like(Q)
    points = []
    for h in hs:
        if not h > 0:
            raise StructureError(f"h must be positive, got {h}")
        error = scale_h(_exp(Qh(h)) - eye, h).distance(target)
        points.append(LimitPoint(h=h, errors={"limit": error}))
    return points


def series_of_transforms_check(
    Q1: BlockOperator,
    Q2: BlockOperator,
    Q1h: Callable[[float], BlockOperator],
    Q2h: Callable[[float], BlockOperator],
    hs: Iterable[float],
) -> list[LimitPoint]:
    """Errors of the product law (-> F[Q1] <| F[Q2]) and the sum law (-> F[Q1 + Q2])."""
    product_target = series_product(holevo_transform(Q1), holevo_transform(Q2))
    sum_target = holevo_transform(Q1 + Q2)
    eye = _identity_like(Q1)
    points = []
    for h in hs:
        a, b = Q1h(h), Q2h(h)
        product = scale_h(_exp(a) @ _exp(b) - eye, h).distance(product_target)
        summed = scale_h(_exp(a + b) - eye, h).distance(sum_target)
        points.append(LimitPoint(h=h, errors={"product": product, "sum": summed}))
    return points
