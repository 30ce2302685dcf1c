"""Test problems: four 1-D integral equations and a small parallel-beam CT setup.

The 1-D generators follow the Regularization Tools discretizations.  In every
case ``b_exact = A @ x_true``; noise is added separately (see `gknoise.noise`).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import LinearOperator, MatrixOperator, as_vector

__all__ = [
    "TestProblem",
    "make_shaw",
    "make_phillips",
    "make_gravity",
    "make_foxgood",
    "make_paralleltomo",
    "shepp_logan",
    "ray_lengths",
    "with_noise",
]


@dataclass(frozen=True)
class TestProblem:
    """Operator, exact solution and (possibly noisy) data."""

    __test__ = False  # not a pytest class

    name: str
    A: LinearOperator
    x_true: np.ndarray | None
    b_exact: np.ndarray | None
    eta: np.ndarray | None
    b: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def delta_noise(self) -> float | None:
        if self.eta is None or self.b_exact is None:
            return None
        return float(np.linalg.norm(self.eta) / np.linalg.norm(self.b_exact))

    @property
    def dense(self) -> np.ndarray:
        if isinstance(self.A, MatrixOperator):
            return self.A.dense
        return self.A.todense()


def _noiseless(name, A, x, params) -> TestProblem:
    op = MatrixOperator(A)
    bex = op.matvec(x)
    return TestProblem(name, op, x, bex, np.zeros_like(bex), bex.copy(), params)


def with_noise(problem: TestProblem, eta, b=None) -> TestProblem:
    """Return a copy of `problem` with noise `eta` (``b = b_exact + eta``)."""
    eta = as_vector(eta, "eta")
    if b is None:
        b = problem.b_exact + eta
    return replace(problem, eta=eta, b=as_vector(b, "b"))


def make_shaw(n: int) -> TestProblem:
    """Shaw's 1-D image restoration model, midpoint quadrature on ``[-pi/2, pi/2]``.

    Kernel ``(cos s + cos t)^2 (sin u / u)^2`` with ``u = pi (sin s + sin t)``;
    the solution is a sum of two Gaussian bumps.
    """
    if n < 2 or n % 2:
        raise ValueError(f"shaw requires an even n >= 2, got {n}")
    h = np.pi / n
    t = -np.pi / 2 + (np.arange(n) + 0.5) * h
    co = np.cos(t)
    psi = np.pi * np.sin(t)
    u = psi[:, None] + psi[None, :]
    # np.sinc(x) = sin(pi x)/(pi x); u = 0 on the anti-diagonal gives 1
    A = h * ((co[:, None] + co[None, :]) * np.sinc(u / np.pi)) ** 2
    x = 2.0 * np.exp(-6.0 * (t - 0.8) ** 2) + np.exp(-2.0 * (t + 0.5) ** 2)
    return _noiseless("shaw", A, x, {"n": n})


def make_phillips(n: int) -> TestProblem:
    """Phillips' test problem, Galerkin discretization with box functions on ``[-6, 6]``.

    Kernel ``f(s - t)`` and solution ``f(t)`` with ``f(u) = 1 + cos(pi u / 3)``
    for ``|u| < 3`` and zero otherwise.  ``A`` is symmetric banded Toeplitz.
    """
    if n < 4 or n % 4:
        raise ValueError(f"phillips requires n divisible by 4, got {n}")
    h = 12.0 / n
    n4 = n // 4
    c = np.cos(np.arange(-1, n4 + 1) * 4.0 * np.pi / n)
    col = np.zeros(n)
    col[:n4] = h + 9.0 / (h * np.pi ** 2) * (2.0 * c[1:n4 + 1] - c[0:n4] - c[2:n4 + 2])
    col[n4] = h / 2.0 + 9.0 / (h * np.pi ** 2) * (np.cos(4.0 * np.pi / n) - 1.0)
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    A = col[idx]
    # x_j = <f, box_j> / sqrt(h): exact cell integrals of 1 + cos(pi t / 3)
    edges = -6.0 + h * np.arange(n + 1)
    lo, hi = edges[:-1], edges[1:]
    inside = (lo >= -3.0 - 1e-12) & (hi <= 3.0 + 1e-12)
    cc = np.pi / 3.0
    integral = (hi - lo) + (np.sin(cc * hi) - np.sin(cc * lo)) / cc
    x = np.where(inside, integral, 0.0) / np.sqrt(h)
    return _noiseless("phillips", A, x, {"n": n})


def make_gravity(n: int, d: float = 0.25) -> TestProblem:
    """1-D gravity surveying, midpoint quadrature on ``[0, 1]^2``.

    Kernel ``d (d^2 + (s - t)^2)^(-3/2)``; solution ``sin(pi t) + sin(2 pi t) / 2``.
    """
    if n < 2:
        raise ValueError(f"gravity requires n >= 2, got {n}")
    if not d > 0:
        raise ValueError(f"depth d must be positive, got {d}")
    h = 1.0 / n
    t = h * (np.arange(n) + 0.5)
    diff = np.subtract.outer(t, t)
    A = h * d / (d ** 2 + diff ** 2) ** 1.5
    x = np.sin(np.pi * t) + 0.5 * np.sin(2.0 * np.pi * t)
    return _noiseless("gravity", A, x, {"n": n, "d": d})


def make_foxgood(n: int) -> TestProblem:
    """Fox & Goodwin's severely ill-posed problem; kernel ``sqrt(s^2 + t^2)``, ``x(t) = t``."""
    if n < 2:
        raise ValueError(f"foxgood requires n >= 2, got {n}")
    h = 1.0 / n
    t = h * (np.arange(n) + 0.5)
    A = h * np.sqrt(t[:, None] ** 2 + t[None, :] ** 2)
    return _noiseless("foxgood", A, t.copy(), {"n": n})


# Tomography ---------------------------------------------------------------

# Modified Shepp-Logan: (intensity, semi-axis a, semi-axis b, x0, y0, angle in degrees)
_SHEPP_LOGAN = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0),
    (0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0),
    (0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0),
    (0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0),
)


def shepp_logan(nx: int) -> np.ndarray:
    """Modified Shepp-Logan phantom sampled at the centres of an ``nx x nx`` grid.

    Row 0 is the top of the image (largest y).
    """
    centres = -1.0 + (np.arange(nx) + 0.5) * (2.0 / nx)
    X, Y = np.meshgrid(centres, centres[::-1])
    img = np.zeros((nx, nx))
    for rho, a, b, x0, y0, phi in _SHEPP_LOGAN:
        ph = np.deg2rad(phi)
        xr = (X - x0) * np.cos(ph) + (Y - y0) * np.sin(ph)
        yr = -(X - x0) * np.sin(ph) + (Y - y0) * np.cos(ph)
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += rho
    return img


def ray_lengths(nx: int, theta_deg: float, offset: float) -> tuple[np.ndarray, np.ndarray]:
    """Pixel indices and intersection lengths of one ray (Siddon traversal).

    The image covers ``[-nx/2, nx/2]^2`` with unit pixels, flattened row-major
    with row 0 at the top.  The ray has direction ``(-sin theta, cos theta)``
    and passes at signed distance `offset` from the origin along
    ``(cos theta, sin theta)``.
    """
    th = np.deg2rad(theta_deg)
    c, s = np.cos(th), np.sin(th)
    p0 = np.array([offset * c, offset * s])
    d = np.array([-s, c])
    half = nx / 2.0
    tvals = []
    for axis in range(2):
        if abs(d[axis]) < 1e-14:
            if not -half < p0[axis] < half:
                return np.zeros(0, dtype=int), np.zeros(0)
            continue
        lines = np.arange(-half, half + 1.0)
        tvals.append((lines - p0[axis]) / d[axis])
    if not tvals:
        return np.zeros(0, dtype=int), np.zeros(0)
    ts = np.unique(np.concatenate(tvals))
    lengths = np.diff(ts)
    mids = 0.5 * (ts[:-1] + ts[1:])
    px = p0[0] + mids * d[0]
    py = p0[1] + mids * d[1]
    inside = (lengths > 1e-12) & (np.abs(px) < half) & (np.abs(py) < half)
    col = np.floor(px[inside] + half).astype(int)
    row = np.floor(half - py[inside]).astype(int)
    col = np.clip(col, 0, nx - 1)
    row = np.clip(row, 0, nx - 1)
    return row * nx + col, lengths[inside]


def make_paralleltomo(nx: int, angles=None, nrays: int | None = None) -> TestProblem:
    """Parallel-beam tomography of the Shepp-Logan phantom.

    One row per (angle, ray); ray offsets are equispaced over the image
    diagonal, ``sqrt(2) * nx``.  The matrix is divided by `nx` so that ``A x``
    stays of order one.  The returned problem is noiseless.
    """
    if nx < 8:
        raise ValueError(f"paralleltomo requires nx >= 8, got {nx}")
    angles = np.arange(0, 180) if angles is None else np.atleast_1d(np.asarray(angles, dtype=float))
    if angles.size == 0:
        raise ValueError("angle set is empty")
    if nrays is None:
        nrays = int(round(np.sqrt(2) * nx))
    if nrays < 1:
        raise ValueError("nrays must be positive")
    width = np.sqrt(2.0) * nx
    offsets = np.linspace(-width / 2, width / 2, nrays) if nrays > 1 else np.zeros(1)
    A = np.zeros((angles.size * nrays, nx * nx))
    row = 0
    for th in angles:
        for off in offsets:
            idx, lens = ray_lengths(nx, th, off)
            np.add.at(A[row], idx, lens)
            row += 1
    A /= nx
    x = shepp_logan(nx).reshape(-1)
    params = {"nx": nx, "angles": angles.tolist(), "nrays": nrays}
    return _noiseless("paralleltomo", A, x, params)
