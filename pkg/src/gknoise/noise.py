"""Synthetic noise with a prescribed level and frequency content.

All generators draw from ``numpy.random.default_rng(seed)`` (PCG64), so a
(spec, seed) pair fully determines the output.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import as_vector, aslinearoperator

__all__ = [
    "NoiseSpec",
    "NOISE_KINDS",
    "white_noise",
    "colored_noise",
    "poisson_noise",
    "poisson_scale_for_level",
    "tomo_photon_noise",
    "generate",
]

NOISE_KINDS = ("white", "red", "violet", "poisson", "tomo-photon")
_EXPONENTS = {"white": 0.0, "red": -2.0, "violet": 2.0}


@dataclass(frozen=True)
class NoiseSpec:
    """What noise to add.

    `level` is the target ``|eta| / |A x|`` for white/red/violet and for
    poisson (through the scale calibration).  `params` may carry
    ``exponent`` (colored), ``scale`` (poisson, overrides `level`) or
    ``n0`` (tomo-photon).
    """

    kind: str = "white"
    level: float = 1e-3
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}; choose from {NOISE_KINDS}")


def _rescale(v: np.ndarray, level: float, b_exact: np.ndarray) -> np.ndarray:
    if not level > 0:
        raise ValueError(f"noise level must be positive, got {level}")
    return v * (level * np.linalg.norm(b_exact) / np.linalg.norm(v))


def white_noise(m: int, level: float, b_exact, seed=None) -> np.ndarray:
    """Gaussian white noise scaled so that ``|eta| = level * |b_exact|``."""
    b_exact = as_vector(b_exact, "b_exact")
    rng = np.random.default_rng(seed)
    return _rescale(rng.standard_normal(m), level, b_exact)


def colored_noise(m: int, level: float, exponent: float, b_exact, seed=None) -> np.ndarray:
    """Noise whose power spectrum follows ``f ** exponent``.

    A white sample is shaped by multiplying its Fourier coefficient at
    frequency ``f`` by ``f ** (exponent / 2)``.  The zero-frequency
    coefficient is dropped for nonzero exponents so the result has zero mean.
    Red noise is ``exponent=-2``, violet ``exponent=+2``.
    """
    b_exact = as_vector(b_exact, "b_exact")
    rng = np.random.default_rng(seed)
    white = rng.standard_normal(m)
    if exponent == 0:
        return _rescale(white, level, b_exact)
    coef = np.fft.rfft(white)
    f = np.arange(coef.size, dtype=np.float64)
    filt = np.zeros_like(f)
    filt[1:] = f[1:] ** (exponent / 2.0)
    shaped = np.fft.irfft(coef * filt, n=m)
    return _rescale(shaped, level, b_exact)


def poisson_noise(b_exact, scale: float, seed=None):
    """Photon-count noise: ``b_i ~ Pois(scale * b_exact_i) / scale``.

    Returns ``(b, eta, delta)`` where ``delta = |eta| / |b_exact|`` is the
    realized noise level.
    """
    b_exact = as_vector(b_exact, "b_exact")
    lam = scale * b_exact
    if np.any(lam < 0):
        raise ValueError("Poisson parameter scale * b_exact has negative entries")
    norm = np.linalg.norm(b_exact)
    if norm == 0:
        raise ValueError("b_exact is zero; noise level undefined")
    rng = np.random.default_rng(seed)
    b = rng.poisson(lam).astype(np.float64) / scale
    eta = b - b_exact
    return b, eta, float(np.linalg.norm(eta) / norm)


def poisson_scale_for_level(b_exact, level: float) -> float:
    """Scale whose expected Poisson noise level is `level`.

    ``E|eta|^2 = sum(b_exact) / scale``, so ``scale = sum(b) / (level |b|)^2``.
    """
    b_exact = as_vector(b_exact, "b_exact")
    return float(np.sum(b_exact) / (level * np.linalg.norm(b_exact)) ** 2)


def tomo_photon_noise(A, x_true, N0: float, seed=None):
    """Transmission-tomography noise from photon counting.

    ``t = exp(-A x)``, ``c ~ Pois(N0 t)``, ``b = -log(c / N0)``.  Zero counts
    are clamped to one before the logarithm.  Returns ``(b, eta, delta)``
    with ``eta = b - A x``.
    """
    if not N0 >= 1:
        raise ValueError(f"N0 must be at least 1, got {N0}")
    op = aslinearoperator(A)
    ax = op.matvec(x_true)
    rng = np.random.default_rng(seed)
    t = np.exp(-ax)
    counts = rng.poisson(t * N0).astype(np.float64)
    counts = np.maximum(counts, 1.0)
    b = -np.log(counts / N0)
    eta = b - ax
    return b, eta, float(np.linalg.norm(eta) / np.linalg.norm(ax))


def generate(spec: NoiseSpec, problem):
    """Return ``(b, eta)`` for `problem` (a `TestProblem`) according to `spec`."""
    bex = problem.b_exact
    m = bex.shape[0]
    if spec.kind in _EXPONENTS:
        exponent = float(spec.params.get("exponent", _EXPONENTS[spec.kind]))
        if exponent == 0:
            eta = white_noise(m, spec.level, bex, spec.seed)
        else:
            eta = colored_noise(m, spec.level, exponent, bex, spec.seed)
        return bex + eta, eta
    if spec.kind == "poisson":
        scale = spec.params.get("scale")
        if scale is None:
            scale = poisson_scale_for_level(bex, spec.level)
        b, eta, _ = poisson_noise(bex, float(scale), spec.seed)
        return b, eta
    n0 = float(spec.params.get("n0", 1e5))
    b, eta, _ = tomo_photon_noise(problem.A, problem.x_true, n0, spec.seed)
    return b, eta
