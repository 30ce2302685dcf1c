"""Spectral and finite-precision diagnostics.

Power spectra use the plain DFT of the vector at its own length (no
padding), with power ``|F_j|^2 / m`` at the nonnegative frequencies
``j = 0..m//2``.  "High frequency" always means strictly above the median
of those indices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DimensionError, as_vector

__all__ = [
    "Spectrum",
    "CumulativePeriodogram",
    "MatchReport",
    "power_spectrum",
    "highfreq_power",
    "highfreq_fraction",
    "cumulative_periodogram",
    "numerical_rank",
    "rank_sequence",
    "shifted_factor_curve",
    "residual_noise_match",
    "lf_component",
]


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectrum; ``power[j] = |F_j|^2 / m``."""

    frequencies: np.ndarray
    power: np.ndarray
    length: int

    @property
    def weights(self) -> np.ndarray:
        """Multiplicity of each bin in the full two-sided spectrum."""
        w = np.full(self.power.shape, 2.0)
        w[0] = 1.0
        if self.length % 2 == 0:
            w[-1] = 1.0
        return w

    @property
    def folded(self) -> np.ndarray:
        """Power with the negative frequencies folded in."""
        return self.power * self.weights

    def total_power(self) -> float:
        """Sum over all ``m`` frequencies; equals ``|v|^2`` by Parseval."""
        return float(np.sum(self.folded))

    @property
    def median_frequency(self) -> float:
        return self.frequencies[-1] / 2.0

    def highfreq_mask(self) -> np.ndarray:
        return self.frequencies > self.median_frequency


def power_spectrum(v) -> Spectrum:
    v = as_vector(v, "v")
    m = v.shape[0]
    if m < 2:
        raise DimensionError("power spectrum needs a vector of length >= 2")
    coef = np.fft.rfft(v)
    power = (coef.real ** 2 + coef.imag ** 2) / m
    return Spectrum(np.arange(power.size), power, m)


def highfreq_power(v) -> float:
    """Folded power of `v` above the median frequency."""
    spec = power_spectrum(v)
    return float(np.sum(spec.folded[spec.highfreq_mask()]))


def highfreq_fraction(v) -> float:
    """Share of the total power above the median frequency (NaN for ``v = 0``)."""
    spec = power_spectrum(v)
    total = spec.total_power()
    if total == 0.0:
        return float("nan")
    return float(np.sum(spec.folded[spec.highfreq_mask()]) / total)


@dataclass(frozen=True)
class CumulativePeriodogram:
    """Normalized running power over frequencies ``1..m//2``."""

    frequencies: np.ndarray
    values: np.ndarray

    def diagonal(self) -> np.ndarray:
        n = self.values.size
        return np.arange(1, n + 1) / n

    def distance(self) -> float:
        """Sup-norm distance from the straight line of a perfectly white vector."""
        return float(np.max(np.abs(self.values - self.diagonal())))


def cumulative_periodogram(v) -> CumulativePeriodogram:
    """Cumulative periodogram of `v`, ignoring the zero frequency.

    Invariant under scaling of `v`.  Raises ValueError when `v` has no power
    away from frequency 0 (for example the zero vector).
    """
    spec = power_spectrum(v)
    p = spec.power[1:]
    total = np.sum(p)
    if not total > 0:
        raise ValueError("vector has no power outside frequency 0")
    values = np.cumsum(p) / total
    values[-1] = 1.0
    return CumulativePeriodogram(spec.frequencies[1:], values)


def numerical_rank(S, tol: float = 0.1) -> int:
    """Number of singular values of `S` above the absolute threshold `tol`.

    Meant for matrices whose columns should be orthonormal, so singular
    values are compared against 1.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim == 1:
        S = S[:, None]
    if S.ndim != 2 or S.size == 0:
        raise ValueError("numerical rank of an empty column collection")
    if not 0.0 < tol < 1.0:
        raise ValueError(f"rank tolerance must lie in (0, 1), got {tol}")
    sv = np.linalg.svd(S, compute_uv=False)
    return int(np.count_nonzero(sv > tol))


def rank_sequence(S, kmax: int, tol: float = 0.1) -> np.ndarray:
    """``numerical_rank(S[:, :k])`` for ``k = 1..kmax``."""
    S = np.asarray(S, dtype=np.float64)
    return np.array([numerical_rank(S[:, :k], tol) for k in range(1, kmax + 1)], dtype=int)


def shifted_factor_curve(phi0_hat, ranks) -> list[tuple[int, float]]:
    """Amplification factors re-indexed by numerical rank.

    Returns ``(rank, max |phi|)`` pairs in order of increasing rank; iterations
    that share a rank contribute their largest factor.
    """
    phi = np.abs(np.asarray(phi0_hat, dtype=np.float64))
    ranks = np.asarray(ranks)
    if phi.shape != ranks.shape:
        raise DimensionError(f"{phi.size} factors but {ranks.size} ranks")
    best: dict[int, float] = {}
    for r, a in zip(ranks.tolist(), phi.tolist()):
        best[r] = max(best.get(r, -np.inf), a)
    return sorted(best.items())


@dataclass(frozen=True)
class MatchReport:
    """How well a residual reproduces the noise.

    ``highfreq_ratio`` is NaN (and ``defined`` False) when ``eta == r``.
    """

    l2_diff: float
    highfreq_ratio: float

    @property
    def defined(self) -> bool:
        return not np.isnan(self.highfreq_ratio)


def residual_noise_match(eta, r) -> MatchReport:
    eta = as_vector(eta, "eta")
    r = as_vector(r, "r")
    if eta.shape != r.shape:
        raise DimensionError(f"eta has length {eta.size}, residual {r.size}")
    diff = eta - r
    return MatchReport(float(np.linalg.norm(diff)), highfreq_fraction(diff))


def lf_component(s_next, phi0_k: float, eta) -> np.ndarray:
    """Smooth part ``s_{k+1} - phi_k(0) eta`` of a left bidiagonalization vector."""
    s_next = as_vector(s_next, "s_next")
    eta = as_vector(eta, "eta")
    if s_next.shape != eta.shape:
        raise DimensionError(f"s has length {s_next.size}, eta {eta.size}")
    return s_next - phi0_k * eta
