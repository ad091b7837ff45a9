"""Repeated quantum interactions and bipartite composition.

A system with Hamiltonian H_S meets a fresh particle (Hamiltonian H_P on
k^) for a time h at each step, coupled through

    H_I(h) = (1/h) [[0, sqrt(h) V*], [sqrt(h) V, H_Sc]]

with dipole part V and scattering part H_Sc. The walk generated by
G_h = exp(-ih H_T(h)) converges to a unitary cocycle whose generator is
F_{-iH, L, W} with

    H = H_S + w I - i V* e(-i H_Sc) V,  L = -i e1(-i H_Sc) V,  W = e0(-i H_Sc)

where w = <0^, H_P 0^>.
"""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from ..config import config
from ..errors import DimensionError, StructureError
from ..generators.ito import (
    GeneratorParams,
    StructureKind,
    assemble_FZLW,
    compose_params,
    decompose_FZLW,
    series_product,
)
from ..linalg.block import BlockOperator, ampliate_bipartite, ampliate_system
from ..linalg.mat import ComplexMatrix, adjoint, as_matrix, im_part, mat_exp, op_norm, phi_funcs
from ..linalg.random import random_hermitian, random_matrix
from .families import GeneratorFamily, realize_general

logger = logging.getLogger(__name__)

CLOSED_FORM_AGREEMENT = 1e-8


@dataclass(frozen=True, eq=False)
class RQIParams:
    """Hamiltonian data of a repeated-interaction model.

    Attributes:
        H_S: System Hamiltonian on h.
        H_P: Particle Hamiltonian on k^ = C (+) k.
        V_D: Dipole coupling h -> h (x) k.
        H_Sc: Scattering Hamiltonian on h (x) k.
    """

    H_S: ComplexMatrix
    H_P: ComplexMatrix
    V_D: ComplexMatrix
    H_Sc: ComplexMatrix

    def __post_init__(self):
        H_S = as_matrix(self.H_S, "H_S")
        H_P = as_matrix(self.H_P, "H_P")
        V_D = as_matrix(self.V_D, "V_D")
        H_Sc = as_matrix(self.H_Sc, "H_Sc")
        d_h = H_S.shape[0]
        K = H_P.shape[0]
        m = d_h * (K - 1)
        if H_S.shape != (d_h, d_h) or H_P.shape != (K, K) or K < 2:
            raise DimensionError(f"H_S {H_S.shape} and H_P {H_P.shape} must be square, H_P at least 2x2")
        if V_D.shape != (m, d_h) or H_Sc.shape != (m, m):
            raise DimensionError(f"V_D {V_D.shape} / H_Sc {H_Sc.shape} inconsistent with d_h={d_h}, d_k={K - 1}")
        for name, M in (("H_S", H_S), ("H_P", H_P), ("H_Sc", H_Sc)):
            defect = op_norm(M - adjoint(M))
            if defect > config.hermitian_tolerance * max(1.0, op_norm(M)):
                raise StructureError(f"{name} is not Hermitian (defect {defect:.3e})")
        object.__setattr__(self, "H_S", H_S)
        object.__setattr__(self, "H_P", H_P)
        object.__setattr__(self, "V_D", V_D)
        object.__setattr__(self, "H_Sc", H_Sc)

    @property
    def dim_h(self) -> int:
        return self.H_S.shape[0]

    @property
    def dim_k(self) -> int:
        return self.H_P.shape[0] - 1

    @property
    def omega(self) -> float:
        """Vacuum expectation <0^, H_P 0^> of the particle Hamiltonian."""
        return float(self.H_P[0, 0].real)

    @classmethod
    def zeros(cls, dim_h: int, dim_k: int) -> "RQIParams":
        m = dim_h * dim_k
        return cls(np.zeros((dim_h, dim_h)), np.zeros((dim_k + 1, dim_k + 1)), np.zeros((m, dim_h)), np.zeros((m, m)))

    @classmethod
    def random(cls, rng: np.random.Generator, dim_h: int, dim_k: int, scattering: bool = True) -> "RQIParams":
        m = dim_h * dim_k
        return cls(
            random_hermitian(rng, dim_h),
            random_hermitian(rng, dim_k + 1),
            random_matrix(rng, m, dim_h),
            random_hermitian(rng, m) if scattering else np.zeros((m, m)),
        )


def rqi_total(p: RQIParams, h: float) -> BlockOperator:
    """H_T(h) = H_S (x) I + I (x) H_P + H_I(h)."""
    if not h > 0:
        raise StructureError(f"h must be positive, got {h}")
    d, k = p.dim_h, p.dim_k
    system = BlockOperator.diagonal(p.H_S, np.kron(p.H_S, np.eye(k)))
    particle = BlockOperator.from_kron(np.kron(np.eye(d), p.H_P), d, k)
    interaction = BlockOperator.from_blocks(
        np.zeros((d, d)),
        p.V_D / np.sqrt(h),
        adjoint(p.V_D) / np.sqrt(h),
        p.H_Sc / h,
    )
    return system + particle + interaction


def rqi_limit_params(p: RQIParams) -> GeneratorParams:
    """(-iH, L, W) of the limit generator."""
    phi = phi_funcs(-1j * p.H_Sc)
    H = p.H_S + p.omega * np.eye(p.dim_h) - 1j * adjoint(p.V_D) @ phi.e @ p.V_D
    return GeneratorParams(-1j * H, -1j * phi.e1 @ p.V_D, phi.e0)


def rqi_limit(p: RQIParams) -> BlockOperator:
    return assemble_FZLW(rqi_limit_params(p))


def rqi_compiled_q(p: RQIParams) -> BlockOperator:
    """-i [[H_S + w I, V*], [V, H_Sc]], whose Holevo transform is the limit generator."""
    H = p.H_S + p.omega * np.eye(p.dim_h)
    return -1j * BlockOperator.from_blocks(H, p.V_D, adjoint(p.V_D), p.H_Sc)


def rqi_family(p: RQIParams) -> GeneratorFamily:
    """G_h = exp(-ih H_T(h)), always unitary."""

    def evaluate(h: float) -> BlockOperator:
        H_T = rqi_total(p, h)
        return H_T.with_matrix(mat_exp(-1j * h * H_T.matrix))

    return GeneratorFamily("rqi", evaluate, rqi_limit(p), StructureKind.UNITARY)


# Bipartite composition ------------------------------------------------------

Constituent = Union[RQIParams, GeneratorParams]


def _constituent_family(c: Constituent) -> tuple[GeneratorFamily, GeneratorParams]:
    if isinstance(c, RQIParams):
        return rqi_family(c), rqi_limit_params(c)
    return realize_general(BlockOperator.zeros(c.dim_h, c.dim_k), c), c


def _dims(c: Constituent) -> tuple[int, int]:
    return c.dim_h, c.dim_k


def _check_bipartite(c1: Constituent, c2: Constituent) -> None:
    if _dims(c1)[1] != _dims(c2)[1]:
        raise DimensionError(f"noise dimensions differ: {_dims(c1)[1]} vs {_dims(c2)[1]}")


def ampliate_params(p: GeneratorParams, side: int, dim_other: int) -> GeneratorParams:
    """Parameters of the ampliated generator I (x) F_{Z,L,W} (side 2) or its flip (side 1)."""
    return decompose_FZLW(ampliate_bipartite(assemble_FZLW(p), side, dim_other))


def bipartite_factors(c1: Constituent, c2: Constituent, h: float) -> tuple[BlockOperator, BlockOperator]:
    """The ampliated walk generators G1(h) on side 1 and G2(h) on side 2."""
    _check_bipartite(c1, c2)
    f1, _ = _constituent_family(c1)
    f2, _ = _constituent_family(c2)
    return ampliate_bipartite(f1(h), 1, c2.dim_h), ampliate_bipartite(f2(h), 2, c1.dim_h)


def bipartite_series_limit(c1: Constituent, c2: Constituent) -> BlockOperator:
    """F1 <| F2 for the ampliated constituent limits."""
    _check_bipartite(c1, c2)
    _, p1 = _constituent_family(c1)
    _, p2 = _constituent_family(c2)
    F1 = ampliate_bipartite(assemble_FZLW(p1), 1, c2.dim_h)
    F2 = ampliate_bipartite(assemble_FZLW(p2), 2, c1.dim_h)
    return series_product(F1, F2)


def bipartite_closed_form(c1: Constituent, c2: Constituent) -> BlockOperator:
    """Limit of the bipartite walk from its closed-form parameters.

    For repeated-interaction constituents H = H1 (x) I + I (x) H2 + im X with
    X = [I (x)~ V1* e1(-iS1)] [I (x) e1(-iS2) V2], L = -i(E1~ V1~ + W1~ (I (x) e1(-iS2) V2))
    and W = W1~ (I (x) W2). Other constituents compose through compose_params
    when the first has isometric W, and through the series product otherwise.
    """
    _check_bipartite(c1, c2)
    d1, d2 = c1.dim_h, c2.dim_h
    if not (isinstance(c1, RQIParams) and isinstance(c2, RQIParams)):
        _, p1 = _constituent_family(c1)
        _, p2 = _constituent_family(c2)
        if op_norm(adjoint(p1.W) @ p1.W - np.eye(p1.W.shape[0])) > config.tolerance:
            return bipartite_series_limit(c1, c2)
        return assemble_FZLW(compose_params(ampliate_params(p1, 1, d2), ampliate_params(p2, 2, d1)))

    k = c1.dim_k
    phi1 = phi_funcs(-1j * c1.H_Sc)
    phi2 = phi_funcs(-1j * c2.H_Sc)
    H1 = 1j * rqi_limit_params(c1).Z
    H2 = 1j * rqi_limit_params(c2).Z

    V1 = _ampliate_coupling(c1.V_D, d1, k, side=1, dim_other=d2)
    E1 = _ampliate_noise(phi1.e1, d1, k, side=1, dim_other=d2)
    W1 = _ampliate_noise(phi1.e0, d1, k, side=1, dim_other=d2)
    E2V2 = _ampliate_coupling(phi2.e1 @ c2.V_D, d2, k, side=2, dim_other=d1)
    W2 = _ampliate_noise(phi2.e0, d2, k, side=2, dim_other=d1)

    X = adjoint(V1) @ E1 @ E2V2
    H = ampliate_system(H1, 1, d2) + ampliate_system(H2, 2, d1) + im_part(X)
    L = -1j * (E1 @ V1 + W1 @ E2V2)
    return assemble_FZLW(GeneratorParams(-1j * H, L, W1 @ W2))


def _ampliate_coupling(V: ComplexMatrix, dim_h: int, dim_k: int, side: int, dim_other: int) -> ComplexMatrix:
    small = BlockOperator.from_blocks(np.zeros((dim_h, dim_h)), V, np.zeros((dim_h, dim_h * dim_k)), np.zeros((dim_h * dim_k,) * 2))
    return ampliate_bipartite(small, side, dim_other).B


def _ampliate_noise(M: ComplexMatrix, dim_h: int, dim_k: int, side: int, dim_other: int) -> ComplexMatrix:
    small = BlockOperator.diagonal(np.zeros((dim_h, dim_h)), M)
    return ampliate_bipartite(small, side, dim_other).D


def bipartite_family(c1: Constituent, c2: Constituent) -> GeneratorFamily:
    """G(h) = G1(h)~ G2(h)~ on (h1 (x) h2) (x) k^, converging to F1 <| F2."""
    _check_bipartite(c1, c2)
    f1, _ = _constituent_family(c1)
    f2, _ = _constituent_family(c2)
    d1, d2 = c1.dim_h, c2.dim_h
    limit = bipartite_closed_form(c1, c2)
    series = bipartite_series_limit(c1, c2)
    gap = limit.distance(series)
    if gap > CLOSED_FORM_AGREEMENT * (1 + series.norm()):
        logger.warning(f"Bipartite closed form differs from the series product by {gap:.3e}")

    def evaluate(h: float) -> BlockOperator:
        return ampliate_bipartite(f1(h), 1, d2) @ ampliate_bipartite(f2(h), 2, d1)

    both_unitary = f1.kind is StructureKind.UNITARY and f2.kind is StructureKind.UNITARY
    kind = StructureKind.UNITARY if both_unitary else StructureKind.QUASICONTRACTIVE
    return GeneratorFamily("bipartite", evaluate, limit, kind, f1.beta + f2.beta)


def bipartite_coordinate_form(p1: RQIParams, p2: RQIParams) -> BlockOperator:
    """Limit generator of two scattering-free constituents written out in noise coordinates.

    With V_j, W_j the j-th noise components of the two dipole couplings,
    the top-left block is

        K = -i(H_S1 (x) I + I (x) H_S2 + (w1 + w2) I)
            - 1/2 sum_j (V_j* V_j (x) I + I (x) W_j* W_j) - sum_j V_j* (x) W_j

    and the j-th noise components are L_j = -i(V_j (x) I + I (x) W_j) in the
    left column and -L_j* in the top row.
    """
    _check_bipartite(p1, p2)
    for side, p in ((1, p1), (2, p2)):
        if op_norm(p.H_Sc) > 0:
            raise StructureError(f"constituent {side} has a scattering term; coordinate form needs H_Sc = 0")
    d1, d2, k = p1.dim_h, p2.dim_h, p1.dim_k
    I1, I2 = np.eye(d1), np.eye(d2)
    n = d1 * d2

    K = -1j * (np.kron(p1.H_S, I2) + np.kron(I1, p2.H_S) + (p1.omega + p2.omega) * np.eye(n))
    B = np.zeros((n * k, n), dtype=np.complex128)
    for j in range(k):
        V_j = p1.V_D[j::k, :]
        W_j = p2.V_D[j::k, :]
        K -= 0.5 * (np.kron(adjoint(V_j) @ V_j, I2) + np.kron(I1, adjoint(W_j) @ W_j))
        K -= np.kron(adjoint(V_j), W_j)
        L_j = -1j * (np.kron(V_j, I2) + np.kron(I1, W_j))
        B[j::k, :] = L_j
    return BlockOperator.from_blocks(K, B, -adjoint(B), np.zeros((n * k, n * k)))
