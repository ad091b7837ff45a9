"""Generator families G(h) whose scaled walks converge to a given cocycle.

A GeneratorFamily pairs an evaluator h -> G(h) with its limit generator F,
meaning s_h(G(h) - I) -> F as h -> 0. The constructions here realise every
generator of the form F_{Z,L,W} with contractive W.
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, replace

import numpy as np

from ..config import config
from ..errors import ConfigError, StructureError
from ..generators.holevo import QParams, e_a, e_b, unitary_log
from ..generators.ito import (
    GeneratorParams,
    StructureKind,
    assemble_FZLW,
    decompose_FZLW,
    dual_generator,
    structure_report,
)
from ..linalg.block import BlockOperator, embed_noise_compress, scale_h
from ..linalg.mat import (
    ComplexMatrix,
    adjoint,
    as_matrix,
    func_of_hermitian,
    mat_exp,
    op_norm,
    positive_part,
)

logger = logging.getLogger(__name__)

CERTIFY_SAMPLES = (1.0, 2.0**-3, 2.0**-6)
CONTRACTION_SLACK = 1e-10
ISOMETRIC_PRECONDITION = 1e-8
SPECTRUM_SLACK = 1e-9
TABLE_MATCH = 1e-12


@dataclass(frozen=True, eq=False)
class GeneratorFamily:
    """A family (G(h))_{h>0} together with its limit generator.

    Attributes:
        name: Short label used in logs and reports.
        evaluator: h -> G(h) on h (x) k^.
        limit: The limit generator F.
        kind: Structure class claimed for every G(h).
        beta: Growth constant with |G(h)| <= e^{beta h} when kind is quasicontractive.
        samples: Values of h at which certify() evaluates the family.
    """

    name: str
    evaluator: Callable[[float], BlockOperator]
    limit: BlockOperator
    kind: StructureKind
    beta: float = 0.0
    samples: tuple[float, ...] = CERTIFY_SAMPLES

    def __call__(self, h: float) -> BlockOperator:
        if not h > 0:
            raise StructureError(f"h must be positive, got {h}")
        return self.evaluator(h)

    @property
    def dims(self) -> tuple[int, int]:
        return self.limit.dims

    def hypothesis_error(self, h: float) -> float:
        """|s_h(G(h) - I) - F|."""
        G = self(h)
        return scale_h(G - BlockOperator.identity(*G.dims), h).distance(self.limit)

    def certify(self, tol: float | None = None) -> StructureKind:
        """Structure class actually observed on the sample points.

        A failure at any sample downgrades the class.
        """
        tol = config.tolerance if tol is None else tol
        isometric = coisometric = quasicontractive = True
        for h in self.samples:
            G = self(h).matrix
            eye = np.eye(G.shape[0])
            scale = 1 + op_norm(G) ** 2
            isometric &= op_norm(adjoint(G) @ G - eye) <= tol * scale
            coisometric &= op_norm(G @ adjoint(G) - eye) <= tol * scale
            quasicontractive &= op_norm(G) <= math.exp(self.beta * h) + tol * scale

        if isometric and coisometric:
            observed = StructureKind.UNITARY
        elif isometric:
            observed = StructureKind.ISOMETRIC
        elif coisometric:
            observed = StructureKind.COISOMETRIC
        elif quasicontractive:
            observed = StructureKind.QUASICONTRACTIVE
        else:
            observed = StructureKind.GENERAL

        if _satisfies(observed, self.kind):
            return self.kind
        if _rank(observed) >= _rank(self.kind):
            # isometric claimed, coisometric observed or the reverse
            observed = StructureKind.QUASICONTRACTIVE
        logger.warning(f"Family {self.name}: claimed {self.kind.name}, observed {observed.name}")
        return observed

    def certified(self, tol: float | None = None) -> "GeneratorFamily":
        """This family with its kind replaced by the certified one."""
        kind = self.certify(tol)
        return self if kind is self.kind else replace(self, kind=kind)


_KIND_RANK = {
    StructureKind.GENERAL: 0,
    StructureKind.QUASICONTRACTIVE: 1,
    StructureKind.ISOMETRIC: 2,
    StructureKind.COISOMETRIC: 2,
    StructureKind.UNITARY: 3,
}


def _rank(kind: StructureKind) -> int:
    return _KIND_RANK[kind]


def _satisfies(observed: StructureKind, claimed: StructureKind) -> bool:
    if observed is claimed or observed is StructureKind.UNITARY:
        return True
    return _rank(claimed) <= _rank(StructureKind.QUASICONTRACTIVE) and _rank(observed) >= _rank(claimed)


def _limit_kind(F: BlockOperator) -> tuple[StructureKind, float]:
    report = structure_report(F)
    beta = max(report.beta0, 0.0) if math.isfinite(report.beta0) else 0.0
    return report.kind, beta


def _inverse_sqrt(M: ComplexMatrix) -> ComplexMatrix:
    return func_of_hermitian(M, lambda x: x**-0.5)


def v_l(L) -> BlockOperator:
    """The unitary V_L = [[(I + L*L)^{-1/2}, -L*(I + LL*)^{-1/2}], [L(I + L*L)^{-1/2}, (I + LL*)^{-1/2}]]."""
    L = as_matrix(L, "L")
    m, d = L.shape
    Lstar = adjoint(L)
    top = _inverse_sqrt(np.eye(d) + Lstar @ L)
    bottom = _inverse_sqrt(np.eye(m) + L @ Lstar)
    return BlockOperator.from_blocks(top, L @ top, -Lstar @ bottom, bottom)


def v_zlw(Z, L, W) -> BlockOperator:
    """(e^Z (+) I) V_L (I (+) W)."""
    Z = as_matrix(Z, "Z")
    W = as_matrix(W, "W")
    m = W.shape[0]
    left = BlockOperator.diagonal(mat_exp(Z), np.eye(m))
    right = BlockOperator.diagonal(np.eye(Z.shape[0]), W)
    return left @ v_l(L) @ right


def realize_isometric(p: GeneratorParams) -> GeneratorFamily:
    """G(h) = V_{hZ, sqrt(h) L, W}, converging to F_{Z,L,W}.

    Raises:
        StructureError: F_{Z,L,W} is not isometric.
    """
    F = assemble_FZLW(p)
    report = structure_report(F)
    if report.iso_defect > ISOMETRIC_PRECONDITION:
        raise StructureError(
            f"F_(Z,L,W) is not isometric (defect {report.iso_defect:.3e}); "
            "need Z skewadjoint and W isometric"
        )

    def evaluate(h: float) -> BlockOperator:
        return v_zlw(h * p.Z, math.sqrt(h) * p.L, p.W)

    kind, beta = _limit_kind(F)
    return GeneratorFamily("realize_isometric", evaluate, F, kind, beta)


def realize_coisometric(p: GeneratorParams) -> GeneratorFamily:
    """Adjoint family of realize_isometric(p), converging to F_{Z,L,W}*."""
    base = realize_isometric(p)
    F = dual_generator(base.limit)
    kind, beta = _limit_kind(F)
    return GeneratorFamily("realize_coisometric", lambda h: base(h).adjoint(), F, kind, beta)


def realize_general(T: BlockOperator, p: GeneratorParams) -> GeneratorFamily:
    """G(h) = e^{hT} V_{hZ, sqrt(h) L, W}, converging to F_{T00 + Z, L, W}.

    Every G(h) satisfies |G(h)| <= e^{h beta} with beta = |T+| + |Z+|.

    Raises:
        StructureError: W is not a contraction.
    """
    T.require_dims(BlockOperator.zeros(p.dim_h, p.dim_k))
    w_norm = op_norm(p.W)
    if w_norm > 1 + CONTRACTION_SLACK:
        raise StructureError(f"W must be a contraction, |W| = {w_norm:.6g}")

    def evaluate(h: float) -> BlockOperator:
        return T.with_matrix(mat_exp(h * T.matrix)) @ v_zlw(h * p.Z, math.sqrt(h) * p.L, p.W)

    F = assemble_FZLW(GeneratorParams(T.A + p.Z, p.L, p.W))
    beta = op_norm(positive_part(T.matrix)) + op_norm(positive_part(p.Z))
    kind, _ = _limit_kind(F)
    T_skew = op_norm(T.matrix + adjoint(T.matrix)) <= config.tolerance * (1 + T.norm())
    if not T_skew or _rank(kind) < _rank(StructureKind.QUASICONTRACTIVE):
        kind = StructureKind.QUASICONTRACTIVE
    return GeneratorFamily("realize_general", evaluate, F, kind, beta)


def realize_from_generator(F: BlockOperator) -> GeneratorFamily:
    """Realise F = F_{Z,L,W} (contractive W) through realize_general with T = 0.

    Raises:
        DilationRequiredError: F is not of the form F_{Z,L,W}.
        StructureError: W is not a contraction.
    """
    p = decompose_FZLW(F)
    return replace(realize_general(BlockOperator.zeros(*F.dims), p), name="realize_from_generator")


def realize_unitary_exp(Z, L, R) -> GeneratorFamily:
    """G(h) = exp(Q_{h(Z + L* e_a(R) L), sqrt(h) e_b(R) L, iR}), converging to F_{Z,L,e^{iR}}.

    Raises:
        StructureError: R is not Hermitian or its spectrum leaves [0, 2 pi).
    """
    Z = as_matrix(Z, "Z")
    L = as_matrix(L, "L")
    R = as_matrix(R, "R")
    if op_norm(R - adjoint(R)) > config.hermitian_tolerance * max(1.0, op_norm(R)):
        raise StructureError("R must be Hermitian")
    spectrum = np.linalg.eigvalsh((R + adjoint(R)) / 2)
    if spectrum[0] < -SPECTRUM_SLACK or spectrum[-1] >= 2 * np.pi:
        raise StructureError(f"spectrum of R [{spectrum[0]:.6g}, {spectrum[-1]:.6g}] is outside [0, 2 pi)")

    ea = func_of_hermitian(R, e_a)
    eb = func_of_hermitian(R, e_b)
    A = Z + adjoint(L) @ ea @ L
    B = eb @ L

    def evaluate(h: float) -> BlockOperator:
        Q = QParams(h * A, math.sqrt(h) * B, 1j * R).assemble()
        return Q.with_matrix(mat_exp(Q.matrix))

    F = assemble_FZLW(GeneratorParams(Z, L, mat_exp(1j * R)))
    kind, beta = _limit_kind(F)
    return GeneratorFamily("realize_unitary_exp", evaluate, F, kind, beta)


def realize_unitary_params(p: GeneratorParams) -> GeneratorFamily:
    """realize_unitary_exp with R the principal logarithm of a unitary W."""
    return realize_unitary_exp(p.Z, p.L, unitary_log(p.W))


def preservation_family(C, dim_h: int) -> GeneratorFamily:
    """Constant family G = I (+) C with s_h(G - I) = diag(0, C - I) for every h.

    Args:
        C: Contraction on h (x) k.
        dim_h: Dimension of the initial space h.
    """
    C = as_matrix(C, "C")
    c_norm = op_norm(C)
    if c_norm > 1 + CONTRACTION_SLACK:
        raise StructureError(f"C must be a contraction, |C| = {c_norm:.6g}")
    G = BlockOperator.diagonal(np.eye(dim_h), C)
    F = BlockOperator.diagonal(np.zeros((dim_h, dim_h)), C - np.eye(C.shape[0]))
    kind, beta = _limit_kind(F)
    return GeneratorFamily("preservation", lambda h: G, F, kind, beta)


def compressed_family(family: GeneratorFamily, J) -> GeneratorFamily:
    """The family compressed to a noise subspace through an isometry J: k -> K.

    G_J(h) = (I (x) (1 (+) J))* G(h) (I (x) (1 (+) J)), with the limit compressed
    the same way. Compressing unitary data gives contractive noise corners
    that are not isometric.
    """
    J = as_matrix(J, "J")
    F = embed_noise_compress(family.limit, J)

    def evaluate(h: float) -> BlockOperator:
        return embed_noise_compress(family(h), J)

    kind, beta = _limit_kind(F)
    if kind is StructureKind.GENERAL:
        kind = StructureKind.QUASICONTRACTIVE
    return GeneratorFamily(f"{family.name}|J", evaluate, F, kind, max(beta, family.beta), family.samples)


def table_family(entries: Sequence[tuple[float, BlockOperator]], limit: BlockOperator) -> GeneratorFamily:
    """Family given by an explicit table of (h, G(h)).

    Raises:
        ConfigError: The table is empty, or evaluated at an h it does not hold.
    """
    if not entries:
        raise ConfigError("table must hold at least one entry", "family.table")
    for _, G in entries:
        G.require_dims(limit)
    hs = np.array([h for h, _ in entries], dtype=float)
    values = [G for _, G in entries]

    def evaluate(h: float) -> BlockOperator:
        matches = np.flatnonzero(np.abs(hs - h) <= TABLE_MATCH * hs)
        if matches.size == 0:
            raise ConfigError(f"no table entry for h={h!r}", "family.table")
        return values[int(matches[0])]

    kind, beta = _limit_kind(limit)
    return GeneratorFamily("explicit_Gh_table", evaluate, limit, kind, beta, tuple(float(h) for h in hs))
