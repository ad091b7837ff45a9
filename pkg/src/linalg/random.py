"""Seeded random operators for experiments and property checks."""

import numpy as np

from .mat import ComplexMatrix, adjoint, mat_exp, op_norm

CONTRACTION_MARGIN = 0.1


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_matrix(rng: np.random.Generator, rows: int, cols: int | None = None) -> ComplexMatrix:
    """Standard complex Gaussian entries."""
    cols = rows if cols is None else cols
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    return random_matrix(rng, n, 1)[:, 0]


def random_hermitian(rng: np.random.Generator, n: int) -> ComplexMatrix:
    M = random_matrix(rng, n)
    return (M + adjoint(M)) / 2


def random_skewadjoint(rng: np.random.Generator, n: int) -> ComplexMatrix:
    M = random_matrix(rng, n)
    return (M - adjoint(M)) / 2


def random_unitary(rng: np.random.Generator, n: int) -> ComplexMatrix:
    return mat_exp(random_skewadjoint(rng, n))


def random_contraction(rng: np.random.Generator, n: int) -> ComplexMatrix:
    W = random_matrix(rng, n)
    return W / (op_norm(W) + CONTRACTION_MARGIN)


def random_phase_hermitian(
    rng: np.random.Generator, n: int, low: float = 0.1, high: float = 2 * np.pi - 0.1
) -> ComplexMatrix:
    """Hermitian R with spectrum drawn uniformly from [low, high]."""
    U = random_unitary(rng, n)
    phases = rng.uniform(low, high, size=n)
    return (U * phases) @ adjoint(U)


def random_isometry(rng: np.random.Generator, rows: int, cols: int) -> ComplexMatrix:
    """rows x cols matrix with orthonormal columns."""
    Q, _ = np.linalg.qr(random_matrix(rng, rows, cols))
    return Q


def scaled(M: ComplexMatrix, bound: float) -> ComplexMatrix:
    """M rescaled so its spectral norm is at most bound."""
    norm = op_norm(M)
    return M if norm <= bound else M * (bound / norm)
