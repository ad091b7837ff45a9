"""Dense complex linear algebra.

Every operator in the package is carried as a ``complex128`` numpy array.
Exponentials come from ``scipy.linalg.expm`` (scaling and squaring with a
degree-13 Pade approximant); Hermitian spectra from ``scipy.linalg.eigh``.
"""

import logging
from collections.abc import Callable
from typing import NamedTuple

import numpy as np
import scipy.linalg

from ..config import config
from ..errors import MatrixError

logger = logging.getLogger(__name__)

ComplexMatrix = np.ndarray


class PhiValues(NamedTuple):
    """The entire functions e0, e1, e2 and e evaluated at one matrix."""

    e0: ComplexMatrix
    e1: ComplexMatrix
    e2: ComplexMatrix
    e: ComplexMatrix


def as_matrix(M, name: str = "matrix") -> ComplexMatrix:
    """Coerce to a finite 2-D complex array."""
    arr = np.asarray(M, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise MatrixError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise MatrixError(f"{name} has non-finite entries")
    return arr


def as_square(M, name: str = "matrix") -> ComplexMatrix:
    """Coerce to a finite square complex array."""
    arr = as_matrix(M, name)
    if arr.shape[0] != arr.shape[1]:
        raise MatrixError(f"{name} must be square, got shape {arr.shape}")
    return arr


def adjoint(M: ComplexMatrix) -> ComplexMatrix:
    return np.conj(M).T


def re_part(M: ComplexMatrix) -> ComplexMatrix:
    """(M + M*)/2."""
    return (M + adjoint(M)) / 2


def im_part(M: ComplexMatrix) -> ComplexMatrix:
    """(M - M*)/(2i)."""
    return (M - adjoint(M)) / 2j


def mat_exp(M) -> ComplexMatrix:
    """Matrix exponential e^M."""
    A = as_square(M)
    return scipy.linalg.expm(A)


def herm_eig(H) -> tuple[np.ndarray, ComplexMatrix]:
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.

    The input is symmetrized to (H + H*)/2 before decomposition.
    """
    A = as_square(H)
    scale = max(np.linalg.norm(A, 2), 1.0)
    defect = np.linalg.norm(A - adjoint(A), 2)
    if defect > config.hermitian_tolerance * scale:
        logger.warning(f"herm_eig: symmetrizing non-Hermitian input with defect {defect:.3e}")
    eigenvalues, eigenvectors = scipy.linalg.eigh(re_part(A))
    return eigenvalues, eigenvectors


def func_of_hermitian(H, f: Callable[[float], complex]) -> ComplexMatrix:
    """V diag(f(lambda)) V* for the spectral decomposition of H."""
    eigenvalues, V = herm_eig(H)
    try:
        values = np.array([complex(f(float(lam))) for lam in eigenvalues])
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise MatrixError(f"function undefined on the spectrum: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise MatrixError("function undefined on the spectrum")
    return (V * values) @ adjoint(V)


def phi_funcs(D) -> PhiValues:
    """e0(D), e1(D), e2(D) and e(D) without inverting D.

    e1 and e2 are read off the exponentials of the augmented block matrices
    [[D, I], [0, 0]] and [[D, I, 0], [0, 0, I], [0, 0, 0]]; e follows from
    2 e(z) = e2(z) - e2(-z).
    """
    A = as_square(D, "D")
    e0, e1, e2 = _phi_chain(A)
    e2_neg = _phi_chain(-A)[2]
    return PhiValues(e0=e0, e1=e1, e2=e2, e=(e2 - e2_neg) / 2)


def _phi_chain(A: ComplexMatrix) -> tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]:
    n = A.shape[0]
    eye = np.eye(n, dtype=np.complex128)
    aug = np.zeros((3 * n, 3 * n), dtype=np.complex128)
    aug[:n, :n] = A
    aug[:n, n : 2 * n] = eye
    aug[n : 2 * n, 2 * n :] = eye
    big = scipy.linalg.expm(aug)
    return big[:n, :n], big[:n, n : 2 * n], big[:n, 2 * n :]


def positive_part(Z) -> ComplexMatrix:
    """Positive part of re Z: negative eigenvalues of (Z + Z*)/2 clipped to 0."""
    A = as_square(Z, "Z")
    eigenvalues, V = scipy.linalg.eigh(re_part(A))
    clipped = np.clip(eigenvalues, 0.0, None)
    return (V * clipped) @ adjoint(V)


def op_norm(M) -> float:
    """Spectral norm."""
    A = as_matrix(M)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def min_eigenvalue(H: ComplexMatrix) -> float:
    """Smallest eigenvalue of the Hermitian part of H."""
    return float(scipy.linalg.eigvalsh(re_part(H))[0])


def is_psd(H: ComplexMatrix, tol: float = 0.0) -> bool:
    """True when re H >= -tol I."""
    return min_eigenvalue(H) >= -tol
