"""Golub-Kahan bidiagonalization regularization and noise-propagation analysis."""
from .bidiag import ReorthMode, bidiag_init, bidiag_step, bidiagonalize, get_matrices
from .factors import (detect_noise_revealing, noise_estimate, phi_factors, psi_factors,
                      rescaled_noise_floor)
from .linalg import LinearOperator, MatrixOperator, aslinearoperator
from .problems import (make_foxgood, make_gravity, make_paralleltomo, make_phillips,
                       make_shaw)
from .solvers import (craig_modified_rhs, craig_solve, lsmr_residual_coefficients, lsmr_solve,
                      lsqr_residual_coefficients, lsqr_solve)

__version__ = "0.1.0"
