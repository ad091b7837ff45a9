"""Block operators on h (x) k^ = h (+) (h (x) k).

Index order is fixed throughout the package: the d_h vacuum-sector
coordinates first, then h (x) k in lexicographic (h-index, k-index) order.
The Kronecker ordering of h (x) k^ (h-index major, k^-index minor) is only
used internally for ampliations and tensor flips; the permutations between
the two orderings are built once per dimension tuple and cached.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import DimensionError, StructureError
from .mat import ComplexMatrix, adjoint, as_matrix, op_norm

logger = logging.getLogger(__name__)

ISOMETRY_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """Operator on h (x) k^ with 2x2 block access [[A, C], [B, D]]."""

    dim_h: int
    dim_k: int
    matrix: ComplexMatrix

    def __post_init__(self):
        if self.dim_h < 1 or self.dim_k < 1:
            raise DimensionError(f"dims must be >= 1, got ({self.dim_h}, {self.dim_k})")
        arr = as_matrix(self.matrix, "block operator")
        n = self.dim_h * (1 + self.dim_k)
        if arr.shape != (n, n):
            raise DimensionError(
                f"matrix shape {arr.shape} inconsistent with dims ({self.dim_h}, {self.dim_k})"
            )
        object.__setattr__(self, "matrix", arr)

    @classmethod
    def from_blocks(cls, A, B, C, D) -> "BlockOperator":
        A = as_matrix(A, "A")
        B = as_matrix(B, "B")
        C = as_matrix(C, "C")
        D = as_matrix(D, "D")
        d_h = A.shape[0]
        if A.shape != (d_h, d_h) or d_h == 0:
            raise DimensionError(f"A must be square, got {A.shape}")
        m = D.shape[0]
        if D.shape != (m, m) or m % d_h:
            raise DimensionError(f"D shape {D.shape} incompatible with d_h={d_h}")
        if B.shape != (m, d_h) or C.shape != (d_h, m):
            raise DimensionError(f"B {B.shape} / C {C.shape} incompatible with A {A.shape}, D {D.shape}")
        return cls(d_h, m // d_h, np.block([[A, C], [B, D]]))

    @classmethod
    def zeros(cls, dim_h: int, dim_k: int) -> "BlockOperator":
        n = dim_h * (1 + dim_k)
        return cls(dim_h, dim_k, np.zeros((n, n), dtype=np.complex128))

    @classmethod
    def identity(cls, dim_h: int, dim_k: int) -> "BlockOperator":
        n = dim_h * (1 + dim_k)
        return cls(dim_h, dim_k, np.eye(n, dtype=np.complex128))

    @classmethod
    def diagonal(cls, top, bottom) -> "BlockOperator":
        """top (+) bottom."""
        top = as_matrix(top, "top")
        bottom = as_matrix(bottom, "bottom")
        return cls.from_blocks(
            top,
            np.zeros((bottom.shape[0], top.shape[0])),
            np.zeros((top.shape[0], bottom.shape[0])),
            bottom,
        )

    @property
    def dims(self) -> tuple[int, int]:
        return self.dim_h, self.dim_k

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def A(self) -> ComplexMatrix:
        return self.matrix[: self.dim_h, : self.dim_h]

    @property
    def C(self) -> ComplexMatrix:
        return self.matrix[: self.dim_h, self.dim_h :]

    @property
    def B(self) -> ComplexMatrix:
        return self.matrix[self.dim_h :, : self.dim_h]

    @property
    def D(self) -> ComplexMatrix:
        return self.matrix[self.dim_h :, self.dim_h :]

    def adjoint(self) -> "BlockOperator":
        return BlockOperator(self.dim_h, self.dim_k, adjoint(self.matrix))

    def norm(self) -> float:
        return op_norm(self.matrix)

    def with_matrix(self, matrix: ComplexMatrix) -> "BlockOperator":
        return BlockOperator(self.dim_h, self.dim_k, matrix)

    def require_dims(self, other: "BlockOperator") -> None:
        if self.dims != other.dims:
            raise DimensionError(f"dimension mismatch: {self.dims} vs {other.dims}")

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        self.require_dims(other)
        return self.with_matrix(self.matrix + other.matrix)

    def __sub__(self, other: "BlockOperator") -> "BlockOperator":
        self.require_dims(other)
        return self.with_matrix(self.matrix - other.matrix)

    def __neg__(self) -> "BlockOperator":
        return self.with_matrix(-self.matrix)

    def __mul__(self, scalar: complex) -> "BlockOperator":
        return self.with_matrix(self.matrix * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "BlockOperator":
        return self.with_matrix(self.matrix / scalar)

    def __matmul__(self, other: "BlockOperator") -> "BlockOperator":
        self.require_dims(other)
        return self.with_matrix(self.matrix @ other.matrix)

    def distance(self, other: "BlockOperator") -> float:
        self.require_dims(other)
        return op_norm(self.matrix - other.matrix)

    def to_kron(self) -> ComplexMatrix:
        """The same operator in Kronecker ordering of h (x) k^."""
        order = kron_order(self.dim_h, self.dim_k)
        return self.matrix[np.ix_(order, order)]

    @classmethod
    def from_kron(cls, matrix: ComplexMatrix, dim_h: int, dim_k: int) -> "BlockOperator":
        inverse = block_order(dim_h, dim_k)
        matrix = as_matrix(matrix)
        return cls(dim_h, dim_k, matrix[np.ix_(inverse, inverse)])


def hat(c, dim_k: int | None = None) -> np.ndarray:
    """The vector (1, c) in k^."""
    vec = as_vector(c, dim_k)
    return np.concatenate([[1.0 + 0j], vec])


def as_vector(c, dim_k: int | None = None) -> np.ndarray:
    vec = np.atleast_1d(np.asarray(c, dtype=np.complex128)).ravel()
    if dim_k is not None and vec.shape[0] != dim_k:
        raise DimensionError(f"noise vector has length {vec.shape[0]}, expected {dim_k}")
    if not np.all(np.isfinite(vec)):
        raise DimensionError("noise vector has non-finite entries")
    return vec


@lru_cache(maxsize=None)
def kron_order(dim_h: int, dim_k: int) -> np.ndarray:
    """order[kron index] = block index."""
    K = 1 + dim_k
    order = np.empty(dim_h * K, dtype=np.intp)
    for i in range(dim_h):
        order[i * K] = i
        for j in range(dim_k):
            order[i * K + 1 + j] = dim_h + i * dim_k + j
    order.setflags(write=False)
    logger.debug(f"Built block/Kronecker permutation for dims ({dim_h}, {dim_k})")
    return order


@lru_cache(maxsize=None)
def block_order(dim_h: int, dim_k: int) -> np.ndarray:
    """Inverse of kron_order."""
    inverse = np.argsort(kron_order(dim_h, dim_k))
    inverse.setflags(write=False)
    return inverse


@lru_cache(maxsize=None)
def flip_order(dim_1: int, dim_2: int, dim_env: int) -> np.ndarray:
    """Index map taking h2 (x) h1 (x) E to h1 (x) h2 (x) E (all Kronecker ordered).

    For a matrix M on h2 (x) h1 (x) E, M[np.ix_(idx, idx)] is the flipped
    operator on h1 (x) h2 (x) E.
    """
    idx = np.empty(dim_1 * dim_2 * dim_env, dtype=np.intp)
    for i1 in range(dim_1):
        for i2 in range(dim_2):
            for e in range(dim_env):
                target = (i1 * dim_2 + i2) * dim_env + e
                source = (i2 * dim_1 + i1) * dim_env + e
                idx[target] = source
    idx.setflags(write=False)
    return idx


def delta(dim_h: int, dim_k: int) -> BlockOperator:
    """The Ito projection 0 (+) I."""
    n = dim_h * (1 + dim_k)
    diag = np.zeros(n, dtype=np.complex128)
    diag[dim_h:] = 1.0
    return BlockOperator(dim_h, dim_k, np.diag(diag))


def delta_perp(dim_h: int, dim_k: int) -> BlockOperator:
    """I (+) 0."""
    n = dim_h * (1 + dim_k)
    diag = np.zeros(n, dtype=np.complex128)
    diag[:dim_h] = 1.0
    return BlockOperator(dim_h, dim_k, np.diag(diag))


def ampliate_vector(c: np.ndarray, dim_h: int) -> ComplexMatrix:
    """I_h (x) |c>, a (d_h d_k) x d_h matrix."""
    return np.kron(np.eye(dim_h, dtype=np.complex128), c.reshape(-1, 1))


def compress(F: BlockOperator, c, d) -> ComplexMatrix:
    """(I (x) <c^|) F (I (x) |d^>)."""
    cvec = as_vector(c, F.dim_k)
    dvec = as_vector(d, F.dim_k)
    Ic = ampliate_vector(cvec, F.dim_h)
    Id = ampliate_vector(dvec, F.dim_h)
    return F.A + F.C @ Id + adjoint(Ic) @ F.B + adjoint(Ic) @ F.D @ Id


def scale_h(F: BlockOperator, h: float) -> BlockOperator:
    """s_h: (A, B, C, D) -> (A/h, B/sqrt(h), C/sqrt(h), D)."""
    if not h > 0:
        raise StructureError(f"scale parameter must be positive, got {h}")
    weights = np.ones(F.size)
    weights[: F.dim_h] = h ** -0.5
    return F.with_matrix(weights[:, None] * F.matrix * weights[None, :])


def unscale_h(F: BlockOperator, h: float) -> BlockOperator:
    """Inverse of s_h."""
    return scale_h(F, 1.0 / h)


def ampliate_bipartite(F_small: BlockOperator, side: int, dim_other: int) -> BlockOperator:
    """Ampliate an operator on h_i (x) k^ to (h1 (x) h2) (x) k^.

    side=2 gives I_{h1} (x) F_small; side=1 gives the flipped ampliation
    I_{h2} (x)~ F_small with h1 kept as the first system factor.
    """
    if side not in (1, 2):
        raise DimensionError(f"side must be 1 or 2, got {side}")
    if dim_other < 1:
        raise DimensionError(f"dim_other must be >= 1, got {dim_other}")
    K = 1 + F_small.dim_k
    plain = np.kron(np.eye(dim_other, dtype=np.complex128), F_small.to_kron())
    if side == 2:
        return BlockOperator.from_kron(plain, dim_other * F_small.dim_h, F_small.dim_k)
    idx = flip_order(F_small.dim_h, dim_other, K)
    flipped = plain[np.ix_(idx, idx)]
    return BlockOperator.from_kron(flipped, F_small.dim_h * dim_other, F_small.dim_k)


def ampliate_system(x: ComplexMatrix, side: int, dim_other: int) -> ComplexMatrix:
    """x (x) I_2 for side 1, I_1 (x) x for side 2."""
    eye = np.eye(dim_other, dtype=np.complex128)
    return np.kron(x, eye) if side == 1 else np.kron(eye, x)


def require_isometry(J: ComplexMatrix) -> ComplexMatrix:
    J = as_matrix(J, "J")
    defect = op_norm(adjoint(J) @ J - np.eye(J.shape[1]))
    if defect > ISOMETRY_TOLERANCE:
        raise StructureError(f"J is not an isometry (defect {defect:.3e})")
    return J


def embed_noise_compress(F: BlockOperator, J) -> BlockOperator:
    """(I (x) (1 (+) J))* F (I (x) (1 (+) J)) for an isometry J: k -> K."""
    J = require_isometry(J)
    if J.shape[0] != F.dim_k:
        raise DimensionError(f"J maps into dimension {J.shape[0]}, F has noise dimension {F.dim_k}")
    IJ = np.kron(np.eye(F.dim_h, dtype=np.complex128), J)
    return BlockOperator.from_blocks(
        F.A,
        adjoint(IJ) @ F.B,
        F.C @ IJ,
        adjoint(IJ) @ F.D @ IJ,
    )
