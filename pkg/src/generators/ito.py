"""The Ito *-monoid of stochastic generators.

B(h (x) k^) with the series product F1 <| F2 = F1 + F2 + F1 Delta F2 and
the adjoint as involution. Generators of the form F_{Z,L,W} are assembled
and composed here, and the structure relations are checked numerically.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum, auto

import numpy as np

from ..config import config
from ..errors import DilationRequiredError, DimensionError
from ..linalg.block import BlockOperator, delta_perp
from ..linalg.mat import ComplexMatrix, adjoint, as_matrix, im_part, min_eigenvalue, op_norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GeneratorParams:
    """Parameters (Z, L, W) of F_{Z,L,W}."""

    Z: ComplexMatrix
    L: ComplexMatrix
    W: ComplexMatrix

    def __post_init__(self):
        Z = as_matrix(self.Z, "Z")
        L = as_matrix(self.L, "L")
        W = as_matrix(self.W, "W")
        d_h = Z.shape[0]
        m = W.shape[0]
        if Z.shape != (d_h, d_h) or W.shape != (m, m) or m % d_h or m == 0:
            raise DimensionError(f"Z {Z.shape} and W {W.shape} are not consistent")
        if L.shape != (m, d_h):
            raise DimensionError(f"L has shape {L.shape}, expected {(m, d_h)}")
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "W", W)

    @property
    def dim_h(self) -> int:
        return self.Z.shape[0]

    @property
    def dim_k(self) -> int:
        return self.W.shape[0] // self.dim_h

    @classmethod
    def trivial(cls, dim_h: int, dim_k: int) -> "GeneratorParams":
        """(0, 0, I): assembles to the monoid identity."""
        m = dim_h * dim_k
        return cls(np.zeros((dim_h, dim_h)), np.zeros((m, dim_h)), np.eye(m))


class StructureKind(Enum):
    """Structure class of a generator (and of its cocycle)."""

    UNITARY = auto()
    ISOMETRIC = auto()
    COISOMETRIC = auto()
    QUASICONTRACTIVE = auto()
    GENERAL = auto()


@dataclass(frozen=True)
class StructureReport:
    """Structure-relation defects and the exponential growth bound."""

    iso_defect: float
    coiso_defect: float
    beta0: float
    kind: StructureKind

    @property
    def label(self) -> str:
        if self.kind is StructureKind.QUASICONTRACTIVE:
            return f"quasicontractive({self.beta0:.6g})"
        return self.kind.name.lower()


def series_product(F1: BlockOperator, F2: BlockOperator) -> BlockOperator:
    """F1 <| F2 := F1 + F2 + F1 Delta F2."""
    F1.require_dims(F2)
    # F1 Delta F2 only involves the right block column of F1 and bottom block row of F2
    d = F1.dim_h
    product = F1.matrix[:, d:] @ F2.matrix[d:, :]
    return F1.with_matrix(F1.matrix + F2.matrix + product)


def series_chain(*generators: BlockOperator) -> BlockOperator:
    """Left-to-right series product of one or more generators."""
    if not generators:
        raise ValueError("series_chain needs at least one generator")
    result = generators[0]
    for F in generators[1:]:
        result = series_product(result, F)
    return result


def dual_generator(F: BlockOperator) -> BlockOperator:
    """F*, the generator of the dual cocycle."""
    return F.adjoint()


def assemble_FZLW(p: GeneratorParams) -> BlockOperator:
    """[[Z - L*L/2, -L*W], [L, W - I]]."""
    Lstar = adjoint(p.L)
    return BlockOperator.from_blocks(
        p.Z - 0.5 * Lstar @ p.L,
        p.L,
        -Lstar @ p.W,
        p.W - np.eye(p.W.shape[0]),
    )


def assemble_coisometric(Z, M, W) -> BlockOperator:
    """[[Z - MM*/2, M], [-WM*, W - I]], the coisometric structure form."""
    Z = as_matrix(Z, "Z")
    M = as_matrix(M, "M")
    W = as_matrix(W, "W")
    Mstar = adjoint(M)
    return BlockOperator.from_blocks(
        Z - 0.5 * M @ Mstar,
        -W @ Mstar,
        M,
        W - np.eye(W.shape[0]),
    )


def decompose_FZLW(F: BlockOperator, tol: float | None = None) -> GeneratorParams:
    """Recover (Z, L, W) from F = F_{Z,L,W}.

    Raises:
        DilationRequiredError: C differs from -L*W, so F is not of that form.
    """
    tol = config.tolerance if tol is None else tol
    L = F.B
    W = F.D + np.eye(F.D.shape[0])
    defect = op_norm(F.C + adjoint(L) @ W)
    if defect > tol * (1 + F.norm() ** 2):
        raise DilationRequiredError(
            f"generator is not of the form F_(Z,L,W): C + L*W has norm {defect:.3e}; "
            "realising it needs an external dilation to a larger noise space"
        )
    return GeneratorParams(F.A + 0.5 * adjoint(L) @ L, L, W)


def compose_params(p1: GeneratorParams, p2: GeneratorParams) -> GeneratorParams:
    """Closed-form parameters of F_{Z1,L1,W1} <| F_{Z2,L2,W2}.

    The top-right blocks agree only up to L2*(I - W1*W1)W2, so the result
    assembles to the series product when W1 is an isometry or L2 = 0.
    """
    if (p1.dim_h, p1.dim_k) != (p2.dim_h, p2.dim_k):
        raise DimensionError(
            f"dimension mismatch: {(p1.dim_h, p1.dim_k)} vs {(p2.dim_h, p2.dim_k)}"
        )
    eye = np.eye(p1.W.shape[0])
    if op_norm(p2.L) > 0 and op_norm(adjoint(p1.W) @ p1.W - eye) > config.tolerance:
        logger.warning("compose_params: W1 is not an isometry, result differs from the series product")
    W = p1.W @ p2.W
    L = p1.L + p1.W @ p2.L
    Z = (
        p1.Z
        + p2.Z
        - 0.5 * adjoint(p2.L) @ (eye - adjoint(p1.W) @ p1.W) @ p2.L
        - 1j * im_part(adjoint(p1.L) @ p1.W @ p2.L)
    )
    return GeneratorParams(Z, L, W)


def growth_shift(F: BlockOperator, beta: float) -> BlockOperator:
    """F - beta Delta-perp, generator of the rescaled cocycle e^{-beta t} X_t."""
    return F - beta * delta_perp(F.dim_h, F.dim_k)


def iso_form(F: BlockOperator) -> BlockOperator:
    """F* <| F."""
    return series_product(F.adjoint(), F)


def coiso_form(F: BlockOperator) -> BlockOperator:
    """F <| F*."""
    return series_product(F, F.adjoint())


def growth_bound(F: BlockOperator, tol: float | None = None) -> float:
    """Least beta with F* <| F <= 2 beta Delta-perp, or +inf when none exists.

    Bisection on beta against the Hermitian eigencheck
    2 beta Delta-perp - F* <| F >= -tol (1 + |F|^2) I.
    """
    tol = config.tolerance if tol is None else tol
    S = iso_form(F).matrix
    P = delta_perp(F.dim_h, F.dim_k).matrix
    norm = F.norm()
    slack = tol * (1 + norm**2)

    def passes(beta: float) -> bool:
        return min_eigenvalue(2 * beta * P - S) >= -slack

    lo, hi = -(norm**2 + norm), norm**2 + norm
    if not passes(hi):
        logger.debug("growth_bound: no beta in range passes, Delta-corner not dissipative")
        return math.inf
    if passes(lo):
        return lo
    while hi - lo > config.bisection_tolerance:
        mid = 0.5 * (lo + hi)
        if passes(mid):
            hi = mid
        else:
            lo = mid
    return hi


def structure_report(F: BlockOperator, tol: float | None = None) -> StructureReport:
    """Classify F by its structure relations."""
    tol = config.tolerance if tol is None else tol
    iso = iso_form(F).norm()
    coiso = coiso_form(F).norm()
    beta0 = growth_bound(F, tol)

    if iso <= tol and coiso <= tol:
        kind = StructureKind.UNITARY
    elif iso <= tol:
        kind = StructureKind.ISOMETRIC
    elif coiso <= tol:
        kind = StructureKind.COISOMETRIC
    elif math.isfinite(beta0):
        kind = StructureKind.QUASICONTRACTIVE
    else:
        kind = StructureKind.GENERAL

    logger.debug(f"structure_report: iso={iso:.3e} coiso={coiso:.3e} beta0={beta0} -> {kind.name}")
    return StructureReport(iso_defect=iso, coiso_defect=coiso, beta0=beta0, kind=kind)
