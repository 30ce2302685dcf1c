"""Golub-Kahan iterative bidiagonalization with optional reorthogonalization.

Starting from ``w_0 = 0``, ``s_1 = b / beta_1`` with ``beta_1 = |b|``, each
step computes::

    alpha_k w_k     = A^T s_k - beta_k w_{k-1}
    beta_{k+1} s_{k+1} = A w_k - alpha_k s_k

All coefficients are kept positive, so the left vectors ``s_{k+1}`` are
``phi_k(AA^T) b`` for Lanczos polynomials with ``sign(phi_k(0)) = (-1)^k``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .linalg import LinearOperator, aslinearoperator, as_vector

__all__ = [
    "ReorthMode",
    "TerminatedError",
    "BidiagState",
    "BidiagMatrices",
    "bidiag_init",
    "bidiag_step",
    "bidiagonalize",
    "get_matrices",
]

_EPS = np.finfo(np.float64).eps


class ReorthMode(str, enum.Enum):
    NONE = "none"
    FULL_DOUBLE = "full-double"


class TerminatedError(RuntimeError):
    """Raised when stepping a bidiagonalization that has already stopped."""


@dataclass
class BidiagState:
    """Everything produced by ``k`` bidiagonalization steps.

    ``alphas`` holds ``alpha_1..alpha_k``, ``betas`` holds
    ``beta_1..beta_{k+1}``; ``S`` has the ``k+1`` left vectors as columns and
    ``W`` the ``k`` right vectors.  After a breakdown in ``beta_{k+1}`` the
    last left column is zero and ``betas[-1] == 0``.
    """

    op: LinearOperator
    b: np.ndarray
    mode: ReorthMode
    alphas: list = field(default_factory=list)
    betas: list = field(default_factory=list)
    _S: list = field(default_factory=list, repr=False)
    _W: list = field(default_factory=list, repr=False)
    terminated: bool = False
    reason: str | None = None
    norm_scale: float = 0.0

    @property
    def k(self) -> int:
        return len(self.alphas)

    @property
    def m(self) -> int:
        return self.op.shape[0]

    @property
    def n(self) -> int:
        return self.op.shape[1]

    @property
    def S(self) -> np.ndarray:
        return np.column_stack(self._S)

    @property
    def W(self) -> np.ndarray:
        if not self._W:
            return np.zeros((self.n, 0))
        return np.column_stack(self._W)

    def s(self, j: int) -> np.ndarray:
        """Left vector ``s_j`` (1-based, as in the recurrences)."""
        return self._S[j - 1]

    def w(self, j: int) -> np.ndarray:
        return self._W[j - 1]

    @property
    def alpha_array(self) -> np.ndarray:
        return np.asarray(self.alphas, dtype=np.float64)

    @property
    def beta_array(self) -> np.ndarray:
        return np.asarray(self.betas, dtype=np.float64)

    @property
    def beta_breakdown(self) -> bool:
        return self.terminated and self.betas[-1] == 0.0


@dataclass(frozen=True)
class BidiagMatrices:
    L: np.ndarray
    L_plus: np.ndarray


def _mgs_twice(v: np.ndarray, basis: list) -> np.ndarray:
    for _ in range(2):
        for q in basis:
            v = v - (q @ v) * q
    return v


def bidiag_init(A, b, mode=ReorthMode.FULL_DOUBLE) -> BidiagState:
    """Start the process: ``beta_1 = |b|`` and ``s_1 = b / beta_1``."""
    op = aslinearoperator(A)
    b = as_vector(b, "b")
    if b.shape[0] != op.shape[0]:
        raise ValueError(f"b has length {b.shape[0]}, operator has {op.shape[0]} rows")
    beta1 = float(np.linalg.norm(b))
    if beta1 == 0.0:
        raise ValueError("right-hand side is zero")
    state = BidiagState(op=op, b=b, mode=ReorthMode(mode))
    state.betas.append(beta1)
    state._S.append(b / beta1)
    return state


def _breakdown_tol(state: BidiagState, raw_norm: float) -> float:
    # Coefficients after the first are O(|A|); scale with the largest seen.
    state.norm_scale = max(state.norm_scale, raw_norm)
    return max(state.m, state.n) * _EPS * state.norm_scale


def bidiag_step(state: BidiagState, A=None) -> BidiagState:
    """Advance by one step in place, appending ``alpha, w, beta, s``.

    The state is marked terminated when a new coefficient falls below the
    breakdown tolerance or when ``k`` reaches ``min(m, n)``.
    """
    if state.terminated:
        raise TerminatedError(f"bidiagonalization already terminated ({state.reason})")
    op = state.op if A is None else aslinearoperator(A)
    k = state.k
    reorth = state.mode is ReorthMode.FULL_DOUBLE

    s_k = state._S[-1]
    u = op.rmatvec(s_k)
    tol = _breakdown_tol(state, float(np.linalg.norm(u)))
    if k > 0:
        u = u - state.betas[-1] * state._W[-1]
    if reorth:
        u = _mgs_twice(u, state._W)
    alpha = float(np.linalg.norm(u))
    if alpha <= tol:
        state.terminated = True
        state.reason = "alpha breakdown"
        return state
    w = u / alpha
    state.alphas.append(alpha)
    state._W.append(w)

    v = op.matvec(w)
    tol = _breakdown_tol(state, float(np.linalg.norm(v)))
    v = v - alpha * s_k
    if reorth:
        v = _mgs_twice(v, state._S)
    beta = float(np.linalg.norm(v))
    if beta <= tol:
        state.betas.append(0.0)
        state._S.append(np.zeros(state.m))
        state.terminated = True
        state.reason = "beta breakdown"
        return state
    state.betas.append(beta)
    state._S.append(v / beta)
    if state.k >= min(state.m, state.n):
        state.terminated = True
        state.reason = "dimension reached"
    return state


def bidiagonalize(A, b, steps: int, mode=ReorthMode.FULL_DOUBLE) -> BidiagState:
    """Run up to `steps` iterations, stopping early on termination."""
    state = bidiag_init(A, b, mode)
    while state.k < steps and not state.terminated:
        bidiag_step(state)
    return state


def get_matrices(state: BidiagState, k: int | None = None) -> BidiagMatrices:
    """Assemble ``L_k`` (k x k lower bidiagonal) and ``L_{k+}`` ((k+1) x k)."""
    k = state.k if k is None else k
    if k < 1:
        raise ValueError("no bidiagonalization steps available")
    if k > state.k:
        raise ValueError(f"only {state.k} steps computed, asked for {k}")
    alphas = state.alpha_array[:k]
    betas = state.beta_array[1:k + 1]
    L_plus = np.zeros((k + 1, k))
    idx = np.arange(k)
    L_plus[idx, idx] = alphas
    L_plus[idx + 1, idx] = betas
    return BidiagMatrices(L=L_plus[:k].copy(), L_plus=L_plus)
