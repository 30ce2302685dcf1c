"""Noise amplification factors and the noise-revealing iteration.

``phi_k(0)`` is the constant term of the Lanczos polynomial with
``s_{k+1} = phi_k(AA^T) b``; its size tracks how much unsmoothed noise sits
in ``s_{k+1}``.  ``psi_k(0)`` plays the same role for the right vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bidiag import BidiagState

__all__ = [
    "FactorTrace",
    "NoiseRevealing",
    "phi_factors",
    "psi_factors",
    "detect_noise_revealing",
    "factor_trace",
    "noise_estimate",
    "rescaled_noise_floor",
]

_BIG = 1e300
_TINY = 1e-300


def phi_factors(state: BidiagState) -> np.ndarray:
    """Amplification factors ``phi_l(0)`` for ``l = 0..k``.

    Uses ``phi_0 = 1/beta_1`` and ``phi_l = -phi_{l-1} * alpha_l / beta_{l+1}``.
    A log-magnitude accumulator runs alongside and takes over once the
    linear value leaves ``[1e-300, 1e300]``.  When ``beta_{k+1}`` broke down
    the last factor is undefined and omitted.
    """
    alphas = state.alpha_array
    betas = state.beta_array
    last = state.k if betas[-1] > 0 else state.k - 1
    out = np.empty(last + 1)
    val = 1.0 / betas[0]
    logmag = -np.log(betas[0])
    out[0] = val
    with np.errstate(over="ignore"):
        _fill(out, alphas, betas, val, logmag, last)
    return out


def _fill(out, alphas, betas, val, logmag, last):
    for l in range(1, last + 1):
        ratio = alphas[l - 1] / betas[l]
        logmag += np.log(alphas[l - 1]) - np.log(betas[l])
        val = -val * ratio
        mag = abs(val)
        if not (_TINY < mag < _BIG) or not np.isfinite(val):
            val = (-1.0) ** l * np.exp(logmag)
        out[l] = val


def psi_factors(state: BidiagState, phi0=None) -> np.ndarray:
    """Right-vector factors ``psi_l(0)`` for ``l = 0..k-1``.

    ``psi_0 = 1/(alpha_1 beta_1)`` and
    ``psi_l = (phi_l(0) - beta_{l+1} psi_{l-1}(0)) / alpha_{l+1}``.
    """
    if state.k < 1:
        raise ValueError("psi factors need at least one completed step")
    alphas = state.alpha_array
    betas = state.beta_array
    phi0 = phi_factors(state) if phi0 is None else np.asarray(phi0)
    count = min(state.k, phi0.size)
    out = np.empty(count)
    out[0] = 1.0 / (alphas[0] * betas[0])
    for l in range(1, count):
        out[l] = (phi0[l] - betas[l] * out[l - 1]) / alphas[l]
    return out


@dataclass(frozen=True)
class NoiseRevealing:
    """Detected noise-revealing iteration and phase.

    ``k_rev`` is None while ``|phi_k(0)|`` keeps increasing.  ``phase`` is the
    inclusive iteration interval around the global maximum where
    ``|phi_k(0)| > plateau * max |phi|``.
    """

    k_rev: int | None
    phase: tuple[int, int] | None

    @property
    def revealed(self) -> bool:
        return self.k_rev is not None


def detect_noise_revealing(phi0, plateau: float = 0.5) -> NoiseRevealing:
    """First local maximum of ``|phi_k(0)|`` (k >= 1) plus the plateau phase."""
    mag = np.abs(np.asarray(phi0, dtype=np.float64))
    if mag.size < 2:
        raise ValueError("need at least two factors")
    k_rev = None
    for k in range(1, mag.size - 1):
        if mag[k] > mag[k + 1]:
            k_rev = k
            break
    if k_rev is None:
        return NoiseRevealing(None, None)
    peak = int(np.argmax(mag))
    above = mag > plateau * mag[peak]
    lo = peak
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = peak
    while hi < mag.size - 1 and above[hi + 1]:
        hi += 1
    return NoiseRevealing(k_rev, (lo, hi))


@dataclass(frozen=True)
class FactorTrace:
    phi0: np.ndarray
    psi0: np.ndarray
    k_rev: int | None
    rev_phase: tuple[int, int] | None


def factor_trace(state: BidiagState, plateau: float = 0.5) -> FactorTrace:
    phi0 = phi_factors(state)
    psi0 = psi_factors(state, phi0) if state.k >= 1 else np.zeros(0)
    if phi0.size >= 2:
        rev = detect_noise_revealing(phi0, plateau)
    else:
        rev = NoiseRevealing(None, None)
    return FactorTrace(phi0, psi0, rev.k_rev, rev.phase)


def noise_estimate(state: BidiagState, k: int, phi0=None) -> np.ndarray:
    """Rescaled left vector ``s_{k+1} / phi_k(0)`` standing in for the noise."""
    if not 0 <= k <= state.k:
        raise ValueError(f"iteration {k} not computed (have {state.k})")
    phi0 = phi_factors(state) if phi0 is None else phi0
    if k >= len(phi0):
        raise ValueError(f"phi_{k}(0) undefined after breakdown")
    return state.s(k + 1) / phi0[k]


def rescaled_noise_floor(phi0, eta_norm: float):
    """Predicted size ``sqrt(phi_k(0)^-2 - |eta|^2)`` of the perturbation left in ``b - eta~``.

    Returns ``(floor, flagged)``; entries with a negative radicand are
    flagged and set to NaN.
    """
    phi0 = np.asarray(phi0, dtype=np.float64)
    radicand = phi0 ** -2.0 - eta_norm ** 2
    flagged = radicand < 0
    floor = np.full(phi0.shape, np.nan)
    floor[~flagged] = np.sqrt(radicand[~flagged])
    return floor, flagged
