"""Named property checks over the whole pipeline.

Each check draws its data from a fixed seed, so a run is reproducible.
"""

import logging
import math
import time
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from ..dynamics.cocycle import euler_compare, jgj_matrix_element_check
from ..dynamics.walk import StepFunction, toyfock_walk
from ..generators import holevo
from ..generators.holevo import (
    QParams,
    f_from_skew_params,
    holevo_transform,
    q_from_unitary_params,
    tau_exp_oracle,
)
from ..generators.ito import (
    GeneratorParams,
    StructureKind,
    assemble_FZLW,
    compose_params,
    series_chain,
    series_product,
    structure_report,
)
from ..linalg.block import BlockOperator
from ..linalg.mat import mat_exp, op_norm, positive_part
from ..linalg.random import (
    make_rng,
    random_contraction,
    random_hermitian,
    random_matrix,
    random_phase_hermitian,
    random_skewadjoint,
    random_unitary,
    scaled,
)
from ..models.families import (
    GeneratorFamily,
    preservation_family,
    realize_isometric,
    realize_unitary_exp,
)
from ..models.rqi import (
    RQIParams,
    bipartite_closed_form,
    bipartite_coordinate_form,
    bipartite_factors,
    bipartite_series_limit,
    rqi_compiled_q,
    rqi_family,
    rqi_limit,
)
from .report import FLOW_HALVING_RATIO, estimate_order, pair_rows
from .runner import flow_cauchy_check, run_scenario, sup_error
from .scenario import ScenarioConfig, Tolerances

logger = logging.getLogger(__name__)

SEED = 20240501
H_GRID = [2.0**-k for k in range(4, 13)]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name:<28} {self.detail} ({self.seconds:.2f}s)"


CheckFn = Callable[[], tuple[bool, str]]
CHECKS: list[tuple[str, CheckFn]] = []


def check(name: str) -> Callable[[CheckFn], CheckFn]:
    def register(fn: CheckFn) -> CheckFn:
        CHECKS.append((name, fn))
        return fn

    return register


def _generator(rng: np.random.Generator, d: int, k: int, bound: float = 1.0) -> BlockOperator:
    return BlockOperator(d, k, scaled(random_matrix(rng, d * (1 + k)), bound))


def _params(rng: np.random.Generator, d: int, k: int, isometric: bool = False) -> GeneratorParams:
    m = d * k
    return GeneratorParams(
        scaled(random_matrix(rng, d), 1.0),
        scaled(random_matrix(rng, m, d), 1.0),
        random_unitary(rng, m) if isometric else random_contraction(rng, m),
    )


def _step_pairs(rng: np.random.Generator, k: int) -> list[tuple[StepFunction, StepFunction]]:
    def vals(n: int) -> np.ndarray:
        return scaled(random_matrix(rng, n, k), 1.0)

    return [
        (StepFunction([0.0, 0.25, 0.75], vals(3)), StepFunction([0.0, 0.5], vals(2))),
        (StepFunction.constant(vals(1)[0]), StepFunction.constant(vals(1)[0])),
        (StepFunction([0.0, 0.125, 0.5, 0.625], vals(4)), StepFunction.zero(k)),
    ]


@check("monoid_axioms")
def _monoid() -> tuple[bool, str]:
    rng = make_rng(SEED)
    worst = 0.0
    zero = BlockOperator.zeros(2, 2)
    for _ in range(200):
        F1, F2, F3 = (_generator(rng, 2, 2) for _ in range(3))
        assoc = series_product(series_product(F1, F2), F3).distance(series_product(F1, series_product(F2, F3)))
        unit = max(series_product(zero, F1).distance(F1), series_product(F1, zero).distance(F1))
        invol = series_product(F1, F2).adjoint().distance(series_product(F2.adjoint(), F1.adjoint()))
        worst = max(worst, assoc, unit, invol)
    return worst <= 1e-12, f"max residual {worst:.2e}"


@check("compose_params")
def _compose() -> tuple[bool, str]:
    rng = make_rng(SEED + 1)
    worst = 0.0
    for _ in range(50):
        p1, p2 = _params(rng, 2, 2, isometric=True), _params(rng, 2, 2)
        direct = series_product(assemble_FZLW(p1), assemble_FZLW(p2))
        worst = max(worst, assemble_FZLW(compose_params(p1, p2)).distance(direct))
    chain = [_params(rng, 2, 1, isometric=True) for _ in range(5)] + [_params(rng, 2, 1)]
    composed = chain[0]
    for p in chain[1:]:
        composed = compose_params(composed, p)
    six = assemble_FZLW(composed).distance(series_chain(*(assemble_FZLW(p) for p in chain)))
    worst = max(worst, six)
    return worst <= 1e-12, f"max residual {worst:.2e}"


@check("structure_classification")
def _structure() -> tuple[bool, str]:
    rng = make_rng(SEED + 2)
    worst_defect = worst_beta = 0.0
    ok = True
    for _ in range(20):
        p = GeneratorParams(scaled(random_skewadjoint(rng, 2), 1.0), scaled(random_matrix(rng, 4, 2), 1.0), random_unitary(rng, 4))
        report = structure_report(assemble_FZLW(p))
        ok &= report.kind is StructureKind.UNITARY
        worst_defect = max(worst_defect, report.iso_defect, report.coiso_defect)

        q = _params(rng, 2, 2)
        beta = structure_report(assemble_FZLW(q)).beta0
        expected = float(np.linalg.eigvalsh((q.Z + q.Z.conj().T) / 2)[-1])
        worst_beta = max(worst_beta, abs(beta - expected))
    ok &= worst_defect <= 1e-10 and worst_beta <= 1e-8
    return ok, f"defect {worst_defect:.2e}, beta error {worst_beta:.2e}"


@check("holevo_oracle")
def _holevo() -> tuple[bool, str]:
    rng = make_rng(SEED + 3)
    oracle = adjoint_gap = unitary_gap = 0.0
    for _ in range(100):
        Q = _generator(rng, 2, 2, bound=5.0)
        F = holevo_transform(Q)
        oracle = max(oracle, F.distance(tau_exp_oracle(Q)) / (1 + F.norm()))
        small = _generator(rng, 2, 2)
        adjoint_gap = max(adjoint_gap, holevo_transform(small.adjoint()).distance(holevo_transform(small).adjoint()))
        S = small - small.adjoint()
        report = structure_report(holevo_transform(S))
        unitary_gap = max(unitary_gap, report.iso_defect, report.coiso_defect)
    ok = oracle <= 1e-10 and adjoint_gap <= 1e-12 and unitary_gap <= 1e-10
    return ok, f"oracle {oracle:.2e}, adjoint {adjoint_gap:.2e}, unitary {unitary_gap:.2e}"


@check("skew_roundtrip")
def _roundtrip() -> tuple[bool, str]:
    rng = make_rng(SEED + 4)
    worst = 0.0
    for i in range(50):
        R = np.zeros((4, 4)) if i == 0 else random_phase_hermitian(rng, 4)
        q = QParams(scaled(random_matrix(rng, 2), 1.0), scaled(random_matrix(rng, 4, 2), 1.0), 1j * R)
        p = f_from_skew_params(q)
        back = q_from_unitary_params(p)
        worst = max(worst, holevo_transform(back.assemble()).distance(assemble_FZLW(p)))
    return worst <= 1e-9, f"max residual {worst:.2e}"


@check("scalar_identities")
def _scalars() -> tuple[bool, str]:
    rng = make_rng(SEED + 5)
    worst = 0.0

    def rel(a: complex, b: complex, *scale: complex) -> float:
        return abs(a - b) / (1 + max(abs(a), abs(b), *(abs(s) for s in scale)))

    radii = 5 * np.sqrt(rng.uniform(size=100))
    angles = rng.uniform(0, 2 * np.pi, size=100)
    for z in radii * np.exp(1j * angles):
        for n in (1, 2, 4, 8, 16, 32, 64):
            w = n * (z - 1)
            worst = max(worst, rel(z**n - 1, w + w * holevo.p_n(w, n) * w, z**n))
            worst = max(worst, rel(n * (holevo.e0(z / n) - 1) - z, holevo.e2(z / n) * z * z / n, z))
        worst = max(worst, rel(1 + z * holevo.e2(z), holevo.e1(z)))
        worst = max(worst, rel(holevo.e1(-z) * holevo.e0(z), holevo.e1(z)))
        worst = max(worst, rel(0.5 * holevo.e1(-z) * holevo.e1(z) + holevo.e_odd(z), holevo.e2(z)))

    for t in np.linspace(0, 2 * np.pi, 64, endpoint=False):
        ea, eb, it = holevo.e_a(t), holevo.e_b(t), 1j * t
        worst = max(worst, rel(ea.conjugate(), -ea))
        worst = max(worst, rel(holevo.e1(it) * eb, 1))
        worst = max(worst, rel(eb.conjugate() * holevo.e1(it), holevo.e0(it)))
        worst = max(worst, rel(abs(eb) ** 2 * holevo.e_odd(it), ea))
    return worst <= 1e-10, f"max relative error {worst:.2e}"


@check("euler_formula")
def _euler() -> tuple[bool, str]:
    rng = make_rng(SEED + 6)
    spot = euler_compare(1.0, lambda h: 1.0, 0.1, 0.0, 1.0)
    ok = abs(spot - (math.e - 1.1**10)) <= 1e-6
    orders = []
    grid = np.linspace(0.0, 1.0, 5)
    for a, E in ((np.array([[0.7]]), np.array([[0.3]])), (scaled(random_matrix(rng, 2), 1.0), scaled(random_matrix(rng, 2), 1.0))):
        errors = []
        for h in H_GRID:
            errors.append(max(euler_compare(a, lambda s: a + s * E, h, r, t) for r in grid for t in grid if r <= t))
        order = estimate_order(errors[-4:], H_GRID[-4:])
        orders.append(order)
        ok &= abs(order - 1.0) <= 0.3
    return ok, f"spot {spot:.6f}, orders {', '.join(f'{o:.3f}' for o in orders)}"


def _family_converges(family: GeneratorFamily, pairs, T: float = 1.0) -> tuple[bool, str]:
    tolerances = Tolerances()
    ok = True
    details = []
    for index, (f, g) in enumerate(pairs):
        errors = [sup_error(family, f, g, h, T) for h in H_GRID]
        rows = pair_rows(index, H_GRID, errors, tolerances, 4)
        ok &= all(row.passed for row in rows)
        details.append(f"{errors[0]:.1e}->{errors[-1]:.1e}")
    return ok, f"{family.name}: " + ", ".join(details)


@check("main_convergence")
def _main() -> tuple[bool, str]:
    rng = make_rng(SEED + 7)
    unitary = realize_unitary_exp(
        scaled(random_skewadjoint(rng, 2), 1.0),
        scaled(random_matrix(rng, 4, 2), 1.0),
        random_phase_hermitian(rng, 4),
    )
    isometric = realize_isometric(
        GeneratorParams(
            scaled(random_skewadjoint(rng, 2), 1.0),
            scaled(random_matrix(rng, 4, 2), 1.0),
            random_unitary(rng, 4),
        )
    )
    preservation = preservation_family(random_contraction(rng, 4), 2)
    pairs = _step_pairs(rng, 2)
    results = [_family_converges(family, pairs) for family in (unitary, isometric, preservation)]
    return all(ok for ok, _ in results), "; ".join(detail for _, detail in results)


def _scalar_rqi() -> RQIParams:
    return RQIParams(
        H_S=np.array([[1.0]]),
        H_P=np.diag([0.0, 1.0]),
        V_D=np.array([[1.0]]),
        H_Sc=np.array([[0.5]]),
    )


@check("rqi_limit")
def _rqi() -> tuple[bool, str]:
    rng = make_rng(SEED + 8)
    p = RQIParams.random(rng, 2, 1)
    transform_gap = rqi_limit(p).distance(holevo_transform(rqi_compiled_q(p)))

    d = 2
    H = p.H_S + p.omega * np.eye(d)
    no_scattering = RQIParams(p.H_S, p.H_P, p.V_D, np.zeros((2, 2)))
    V = p.V_D
    expected = BlockOperator.from_blocks(-1j * H - 0.5 * V.conj().T @ V, -1j * V, -1j * V.conj().T, np.zeros((2, 2)))
    gap_dipole = rqi_limit(no_scattering).distance(expected)
    pure = RQIParams(p.H_S, p.H_P, np.zeros((2, 2)), p.H_Sc)
    expected_pure = BlockOperator.diagonal(-1j * H, mat_exp(-1j * p.H_Sc) - np.eye(2))
    gap_scattering = rqi_limit(pure).distance(expected_pure)

    family = rqi_family(_scalar_rqi())
    f = StepFunction([0.0, 0.5], np.array([[0.5], [1.0]]))
    g = StepFunction.constant([0.8])
    errors = [sup_error(family, f, g, h, 1.0) for h in H_GRID]
    order = estimate_order(errors[-4:], H_GRID[-4:])
    decreasing = all(b <= 1.05 * a for a, b in zip(errors, errors[1:]))

    ok = transform_gap <= 1e-10 and gap_dipole <= 1e-12 and gap_scattering <= 1e-12
    ok &= decreasing and 0.4 <= order <= 1.2
    return ok, (
        f"transform {transform_gap:.2e}, special cases {gap_dipole:.2e}/{gap_scattering:.2e}, order {order:.3f}"
    )


@check("bipartite")
def _bipartite() -> tuple[bool, str]:
    rng = make_rng(SEED + 9)
    c1, c2 = RQIParams.random(rng, 2, 1), RQIParams.random(rng, 2, 1)
    series_gap = bipartite_closed_form(c1, c2).distance(bipartite_series_limit(c1, c2))

    d1 = RQIParams.random(rng, 2, 1, scattering=False)
    d2 = RQIParams.random(rng, 2, 1, scattering=False)
    coordinate_gap = bipartite_coordinate_form(d1, d2).distance(bipartite_closed_form(d1, d2))

    system_only = RQIParams(random_hermitian(rng, 2), np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)))
    G1, G2 = bipartite_factors(system_only, c2, 0.125)
    commutator = op_norm(G1.matrix @ G2.matrix - G2.matrix @ G1.matrix)

    ok = series_gap <= 1e-10 and coordinate_gap <= 1e-10 and commutator <= 1e-12
    return ok, f"series {series_gap:.2e}, coordinates {coordinate_gap:.2e}, commutator {commutator:.2e}"


@check("growth_bounds")
def _growth() -> tuple[bool, str]:
    rng = make_rng(SEED + 10)
    worst = -math.inf
    for _ in range(200):
        Z = scaled(random_matrix(rng, 3), 4.0)
        worst = max(worst, op_norm(mat_exp(Z)) - math.exp(op_norm(positive_part(Z))))
    walk_ok = True
    for n in range(7):
        G = _generator(rng, 2, 1, bound=1.5)
        walk_ok &= toyfock_walk(G, n).norm() <= G.norm() ** n * (1 + 1e-12)
    return worst <= 1e-10 and walk_ok, f"max excess {worst:.2e}"


@check("noise_embedding")
def _jgj() -> tuple[bool, str]:
    rng = make_rng(SEED + 11)
    F_big = _generator(rng, 2, 3)
    J = np.eye(3)[:, :2]
    worst = 0.0
    for f, g in _step_pairs(rng, 2):
        worst = max(worst, jgj_matrix_element_check(F_big, J, f, g, 1.0))
        worst = max(worst, jgj_matrix_element_check(F_big, J, f, g, 1.0, h=0.125))
    return worst <= 1e-12, f"max residual {worst:.2e}"


def flow_rqi() -> RQIParams:
    """Two-level system with one noise channel, used by the flow check."""
    return RQIParams(
        H_S=np.diag([0.5, -0.5]),
        H_P=np.diag([0.0, 1.0]),
        V_D=0.5 * np.array([[0.0, 1.0], [1.0, 0.0]]),
        H_Sc=0.25 * np.eye(2),
    )


@check("flow_cauchy")
def _flow() -> tuple[bool, str]:
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    report = flow_cauchy_check(rqi_family(flow_rqi()), x, 0.5, [0.5, 0.25, 0.125, 0.0625])
    ratios = ", ".join(f"{r:.3f}" for r in report.ratios)
    return report.decreasing(FLOW_HALVING_RATIO), f"ratios {ratios}"


def determinism_scenario() -> dict:
    return {
        "name": "determinism",
        "dims": {"d_h": 1, "d_k": 1},
        "family": {"type": "realize_unitary_exp", "params": {"random": True}},
        "test_functions": [
            {"f": {"breakpoints": [0, 0.4], "values": [[[0.5, 0.1]], [[1.0, 0.0]]]}, "g": {"constant": [[0.3, -0.2]]}}
        ],
        "T": 1.0,
        "h_grid": [0.0625, 0.03125, 0.015625],
        "seed": 3,
    }


@check("determinism")
def _determinism() -> tuple[bool, str]:
    cfg = ScenarioConfig.from_dict(determinism_scenario())
    first = run_scenario(cfg, threads=1).to_csv()
    second = run_scenario(cfg, threads=2).to_csv()
    return first == second, f"{len(first.encode())} bytes"


def run_selftest() -> list[CheckResult]:
    results = []
    for name, fn in CHECKS:
        start = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:
            logger.exception(f"Check {name} raised")
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - start))
    return results
