"""Matrix-free operators, dense fallbacks and Matrix Market I/O."""
from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse

__all__ = [
    "DimensionError",
    "RankDeficientError",
    "LinearOperator",
    "MatrixOperator",
    "as_vector",
    "aslinearoperator",
    "identity",
    "apply",
    "apply_transpose",
    "adjoint_mismatch",
    "pseudoinverse_solve",
    "dense_lstsq",
    "read_matrix_market",
    "write_matrix_market",
    "read_vector",
    "write_vector",
]


class DimensionError(ValueError):
    """Operand length does not match the operator shape."""


class RankDeficientError(np.linalg.LinAlgError):
    """Least-squares matrix is numerically rank deficient."""


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Return `v` as a finite 1-D float64 array."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.reshape(-1)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


class LinearOperator:
    """Matrix-free linear map given by forward and transpose products.

    Parameters
    ----------
    shape : (int, int)
        ``(m, n)``; the forward map takes length-n vectors to length-m vectors.
    matvec, rmatvec : callable
        Functions computing ``A @ v`` and ``A.T @ u``.
    """

    __slots__ = ("_shape", "_matvec", "_rmatvec")

    def __init__(self, shape: tuple[int, int],
                 matvec: Callable[[np.ndarray], np.ndarray],
                 rmatvec: Callable[[np.ndarray], np.ndarray]):
        m, n = (int(s) for s in shape)
        if m < 1 or n < 1:
            raise DimensionError(f"invalid operator shape {shape}")
        object.__setattr__(self, "_shape", (m, n))
        object.__setattr__(self, "_matvec", matvec)
        object.__setattr__(self, "_rmatvec", rmatvec)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    @property
    def shape(self) -> tuple[int, int]:
        return self._shape

    def matvec(self, v) -> np.ndarray:
        v = as_vector(v)
        if v.shape[0] != self._shape[1]:
            raise DimensionError(f"expected length {self._shape[1]}, got {v.shape[0]}")
        return np.asarray(self._matvec(v), dtype=np.float64).reshape(self._shape[0])

    def rmatvec(self, u) -> np.ndarray:
        u = as_vector(u)
        if u.shape[0] != self._shape[0]:
            raise DimensionError(f"expected length {self._shape[0]}, got {u.shape[0]}")
        return np.asarray(self._rmatvec(u), dtype=np.float64).reshape(self._shape[1])

    def __matmul__(self, v):
        return self.matvec(v)

    @property
    def T(self) -> "LinearOperator":
        return LinearOperator(self._shape[::-1], self._rmatvec, self._matvec)

    def todense(self) -> np.ndarray:
        """Assemble the matrix column by column (small problems only)."""
        n = self._shape[1]
        cols = [self.matvec(e) for e in np.eye(n)]
        return np.column_stack(cols)

    def fro_norm_estimate(self, samples: int = 20, seed: int = 0) -> float:
        """Hutchinson estimate of the Frobenius norm."""
        rng = np.random.default_rng(seed)
        n = self._shape[1]
        acc = 0.0
        for _ in range(samples):
            z = rng.choice((-1.0, 1.0), size=n)
            acc += float(np.sum(self.matvec(z) ** 2))
        return np.sqrt(acc / samples)


class MatrixOperator(LinearOperator):
    """Operator backed by a dense array, which stays accessible as ``.dense``."""

    __slots__ = ("_dense",)

    def __init__(self, matrix):
        dense = np.array(matrix, dtype=np.float64, copy=True)
        if dense.ndim != 2:
            raise DimensionError(f"matrix must be 2-D, got shape {dense.shape}")
        if not np.all(np.isfinite(dense)):
            raise ValueError("matrix contains NaN or Inf entries")
        dense.setflags(write=False)
        super().__init__(dense.shape, dense.dot, dense.T.dot)
        object.__setattr__(self, "_dense", dense)

    @property
    def dense(self) -> np.ndarray:
        return self._dense

    def todense(self) -> np.ndarray:
        return self._dense.copy()

    def fro_norm_estimate(self, samples: int = 20, seed: int = 0) -> float:
        return float(np.linalg.norm(self._dense))


def aslinearoperator(A) -> LinearOperator:
    if isinstance(A, LinearOperator):
        return A
    if scipy.sparse.issparse(A):
        A = A.toarray()
    return MatrixOperator(A)


def identity(n: int) -> MatrixOperator:
    return MatrixOperator(np.eye(n))


def apply(op, v) -> np.ndarray:
    """Return ``A @ v``; raises `DimensionError` on a length mismatch."""
    return aslinearoperator(op).matvec(v)


def apply_transpose(op, u) -> np.ndarray:
    """Return ``A.T @ u``; raises `DimensionError` on a length mismatch."""
    return aslinearoperator(op).rmatvec(u)


def adjoint_mismatch(op, trials: int = 100, seed: int = 0) -> float:
    """Largest ``|<Av,u> - <v,A^T u>| / (|v| |u| |A|_F)`` over random pairs."""
    op = aslinearoperator(op)
    m, n = op.shape
    rng = np.random.default_rng(seed)
    scale = op.fro_norm_estimate()
    worst = 0.0
    for _ in range(trials):
        v = rng.standard_normal(n)
        u = rng.standard_normal(m)
        lhs = op.matvec(v) @ u
        rhs = v @ op.rmatvec(u)
        denom = np.linalg.norm(v) * np.linalg.norm(u) * scale
        worst = max(worst, abs(lhs - rhs) / denom)
    return worst


def pseudoinverse_solve(A, b) -> np.ndarray:
    """Minimum-norm least-squares solution ``A^+ b`` via a full SVD.

    Singular values below ``m * eps * sigma_max`` count as zero.
    """
    A = np.asarray(A, dtype=np.float64)
    b = as_vector(b, "b")
    m, _ = A.shape
    if b.shape[0] != m:
        raise DimensionError(f"b has length {b.shape[0]}, A has {m} rows")
    U, sigma, Vt = np.linalg.svd(A, full_matrices=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return np.zeros(A.shape[1])
    keep = sigma > m * np.finfo(np.float64).eps * sigma[0]
    coef = (U[:, keep].T @ b) / sigma[keep]
    return Vt[keep].T @ coef


def dense_lstsq(A, b) -> np.ndarray:
    """Solve ``min |b - A y|`` for full-column-rank `A` by Householder QR."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    b = as_vector(b, "b")
    m, n = A.shape
    if b.shape[0] != m:
        raise DimensionError(f"b has length {b.shape[0]}, A has {m} rows")
    if n > m:
        raise RankDeficientError(f"{m}x{n} matrix cannot have full column rank")
    Q, R = np.linalg.qr(A, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag.max() == 0.0 or diag.min() <= max(m, n) * np.finfo(float).eps * diag.max():
        raise RankDeficientError("matrix is numerically rank deficient")
    return scipy.linalg.solve_triangular(R, Q.T @ b, lower=False)


# Matrix Market ------------------------------------------------------------

def write_matrix_market(path, A, fmt: str = "array", comment: str = "") -> None:
    """Write a dense matrix in Matrix Market ``array`` or ``coordinate`` format."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if fmt == "coordinate":
        A = scipy.sparse.coo_matrix(A)
    elif fmt != "array":
        raise ValueError(f"unknown Matrix Market format {fmt!r}")
    scipy.io.mmwrite(str(path), A, comment=comment, field="real", precision=17)


def read_matrix_market(path) -> np.ndarray:
    """Read a real Matrix Market file (either format) into a dense array."""
    data = scipy.io.mmread(str(path))
    if scipy.sparse.issparse(data):
        data = data.toarray()
    return np.asarray(data, dtype=np.float64)


def write_vector(path, v, comment: str = "") -> None:
    """Write a vector as an ``n x 1`` Matrix Market array."""
    write_matrix_market(path, as_vector(v).reshape(-1, 1), "array", comment)


def read_vector(path) -> np.ndarray:
    data = read_matrix_market(path)
    if 1 not in data.shape:
        raise DimensionError(f"{path} holds a {data.shape} matrix, not a vector")
    return as_vector(data.reshape(-1))
