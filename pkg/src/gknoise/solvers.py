"""CRAIG, LSQR and LSMR iterates from a shared bidiagonalization.

Every method looks for ``x_k = W_k y_k`` and only differs in the small
projected problem:

* CRAIG: ``L_k y = beta_1 e_1`` (forward substitution),
* LSQR:  ``min |beta_1 e_1 - L_{k+} y|`` (Givens QR),
* LSMR:  ``min |alpha_1 beta_1 e_1 - L_{k+1}^T L_{k+} y|`` (dense QR).

The residual-coefficient functions express ``b - A x_k`` in the basis
``S_{k+1}`` using the amplification factors alone.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bidiag import BidiagState, get_matrices
from .factors import noise_estimate
from .linalg import dense_lstsq

__all__ = [
    "METHODS",
    "SolverRow",
    "SolverTrace",
    "craig_solve",
    "lsqr_solve",
    "lsmr_solve",
    "lsqr_projected",
    "craig_modified_rhs",
    "lsqr_residual_coefficients",
    "lsmr_residual_coefficients",
    "solve",
    "solver_trace",
]

METHODS = ("craig", "lsqr", "lsmr")


@dataclass(frozen=True)
class SolverRow:
    """One iterate with its residual diagnostics."""

    method: str
    k: int
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    resnorm: float
    atresnorm: float
    errnorm: float | None = None

    def residual(self, state: BidiagState) -> np.ndarray:
        return state.b - state.op.matvec(self.x)


def _check_k(state: BidiagState, k: int) -> None:
    if not 0 <= k <= state.k:
        raise ValueError(f"iteration {k} not computed (have {state.k})")


def _row(state, method, k, y, p, x_true) -> SolverRow:
    x = state.W[:, :k] @ y if k else np.zeros(state.n)
    r = state.b - state.op.matvec(x)
    atr = state.op.rmatvec(r)
    err = None if x_true is None else float(np.linalg.norm(x - x_true))
    return SolverRow(method, k, x, y, p, float(np.linalg.norm(r)),
                     float(np.linalg.norm(atr)), err)


def _projected_residual(state: BidiagState, k: int, y: np.ndarray) -> np.ndarray:
    p = np.zeros(k + 1)
    p[0] = state.betas[0]
    if k:
        p -= get_matrices(state, k).L_plus @ y
    return p


def craig_solve(state: BidiagState, k: int, x_true=None) -> SolverRow:
    """CRAIG iterate: forward substitution on ``L_k y = beta_1 e_1``."""
    _check_k(state, k)
    alphas, betas = state.alphas, state.betas
    y = np.zeros(k)
    if k:
        y[0] = betas[0] / alphas[0]
        for j in range(1, k):
            y[j] = -betas[j] * y[j - 1] / alphas[j]
    return _row(state, "craig", k, y, _projected_residual(state, k, y), x_true)


def lsqr_projected(alphas, betas, k: int) -> np.ndarray:
    """Solve ``min |beta_1 e_1 - L_{k+} y|`` by Givens rotations on ``L_{k+}``.

    Each rotation eliminates ``beta_{i+1}`` below the running diagonal,
    turning ``L_{k+}`` into upper bidiagonal ``R`` (diagonal ``rho``,
    superdiagonal ``theta``); ``y`` follows by back substitution.
    """
    if k == 0:
        return np.zeros(0)
    rho = np.empty(k)
    theta = np.zeros(k)
    f = np.empty(k)
    rhobar = alphas[0]
    fbar = betas[0]
    for i in range(k):
        beta_next = betas[i + 1]
        r = np.hypot(rhobar, beta_next)
        c, s = rhobar / r, beta_next / r
        rho[i] = r
        f[i] = c * fbar
        fbar = -s * fbar
        if i + 1 < k:
            theta[i + 1] = s * alphas[i + 1]
            rhobar = c * alphas[i + 1]
    y = np.empty(k)
    y[-1] = f[-1] / rho[-1]
    for i in range(k - 2, -1, -1):
        y[i] = (f[i] - theta[i + 1] * y[i + 1]) / rho[i]
    return y


def lsqr_solve(state: BidiagState, k: int, x_true=None) -> SolverRow:
    """LSQR iterate, minimizing ``|b - A x|`` over ``span(W_k)``."""
    _check_k(state, k)
    y = lsqr_projected(state.alphas, state.betas, k)
    return _row(state, "lsqr", k, y, _projected_residual(state, k, y), x_true)


def _alpha_next(state: BidiagState, k: int) -> float:
    if k < state.k:
        return state.alphas[k]
    if state.terminated:
        # the Krylov space is exhausted, so A^T s_{k+1} has no new direction
        return 0.0
    raise ValueError(f"LSMR at k={k} needs alpha_{k + 1}; run one more step")


def lsmr_solve(state: BidiagState, k: int, x_true=None) -> SolverRow:
    """LSMR iterate, minimizing ``|A^T (b - A x)|`` over ``span(W_k)``.

    The projected matrix ``L_{k+1}^T L_{k+}`` is never formed: with the QR
    factorization ``L_{k+} = Q [R; 0]`` the problem becomes
    ``min |alpha_1 beta_1 e_1 - (L_{k+1}^T Q_k) z|`` with ``R y = z``, which
    avoids squaring the condition number.
    """
    _check_k(state, k)
    if k == 0:
        y = np.zeros(0)
        return _row(state, "lsmr", 0, y, _projected_residual(state, 0, y), x_true)
    alpha_next = _alpha_next(state, k)
    Lp = get_matrices(state, k).L_plus
    Lt = np.zeros((k + 1, k + 1))
    # L_{k+1}^T is upper bidiagonal: diagonal alpha_1..alpha_{k+1}, superdiagonal beta_2..beta_{k+1}
    idx = np.arange(k + 1)
    Lt[idx, idx] = np.append(state.alpha_array[:k], alpha_next)
    Lt[idx[:-1], idx[:-1] + 1] = state.beta_array[1:k + 1]
    Q, R = np.linalg.qr(Lp, mode="reduced")
    M = Lt @ Q
    rhs = np.zeros(k + 1)
    rhs[0] = state.alphas[0] * state.betas[0]
    z = dense_lstsq(M, rhs)
    y = scipy.linalg.solve_triangular(R, z, lower=False)
    return _row(state, "lsmr", k, y, _projected_residual(state, k, y), x_true)


_SOLVERS = {"craig": craig_solve, "lsqr": lsqr_solve, "lsmr": lsmr_solve}


def solve(method: str, state: BidiagState, k: int, x_true=None) -> SolverRow:
    try:
        fn = _SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}") from None
    return fn(state, k, x_true)


@dataclass(frozen=True)
class SolverTrace:
    """Per-iteration rows ``k = 0..K`` for one method."""

    method: str
    rows: tuple

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    @property
    def resnorms(self) -> np.ndarray:
        return self.column("resnorm")

    @property
    def atresnorms(self) -> np.ndarray:
        return self.column("atresnorm")

    @property
    def errnorms(self) -> np.ndarray:
        return self.column("errnorm")


def solver_trace(method: str, state: BidiagState, kmax: int | None = None,
                 x_true=None) -> SolverTrace:
    """Iterates for ``k = 0..kmax`` (default: as far as the state allows)."""
    limit = state.k
    if method == "lsmr" and not state.terminated:
        limit = state.k - 1
    kmax = limit if kmax is None else min(kmax, limit)
    rows = tuple(solve(method, state, k, x_true) for k in range(kmax + 1))
    return SolverTrace(method, rows)


def craig_modified_rhs(state: BidiagState, k: int, phi0=None) -> np.ndarray:
    """Right-hand side ``b - s_{k+1}/phi_k(0)`` that the CRAIG iterate solves exactly."""
    _check_k(state, k)
    if state.beta_breakdown and k == state.k:
        return state.b.copy()
    return state.b - noise_estimate(state, k, phi0)


def lsqr_residual_coefficients(phi0, k: int) -> np.ndarray:
    """Coordinates of the LSQR residual in ``S_{k+1}``: ``phi_l(0) / sum phi^2``."""
    phi = np.asarray(phi0, dtype=np.float64)[:k + 1]
    if phi.size < k + 1:
        raise ValueError(f"need {k + 1} amplification factors, got {phi.size}")
    return phi / np.sum(phi ** 2)


def lsmr_residual_coefficients(phi0, psi0, alphas, k: int) -> np.ndarray:
    """Coordinates of the LSMR residual in ``S_{k+1}``.

    Entry ``l`` is ``phi_l(0) * sum_{j=l..k} psi_j(0) / (alpha_{j+1} phi_j(0))``
    divided by ``sum_{j<=k} psi_j(0)^2``.
    """
    phi = np.asarray(phi0, dtype=np.float64)[:k + 1]
    psi = np.asarray(psi0, dtype=np.float64)[:k + 1]
    alpha = np.asarray(alphas, dtype=np.float64)[:k + 1]
    if min(phi.size, psi.size, alpha.size) < k + 1:
        raise ValueError(f"need factors and alphas through index {k}")
    terms = psi / (alpha * phi)
    tails = np.cumsum(terms[::-1])[::-1]
    return phi * tails / np.sum(psi ** 2)
