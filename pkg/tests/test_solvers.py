import numpy as np
import pytest
import scipy.sparse.linalg as spla
from hypothesis import given, settings, strategies as st

from gknoise.bidiag import bidiagonalize, get_matrices
from gknoise.factors import phi_factors, psi_factors
from gknoise.solvers import (METHODS, craig_modified_rhs, craig_solve, lsmr_residual_coefficients,
                             lsmr_solve, lsqr_projected, lsqr_residual_coefficients, lsqr_solve,
                             solve, solver_trace)
from oracles import dense_iterates


@pytest.fixture
def tiny():
    return bidiagonalize(np.diag([2.0, 1.0]), np.array([1.0, 1.0]), 2)


def test_craig_first_iterate_by_hand(tiny):
    np.testing.assert_allclose(craig_solve(tiny, 1).x, [0.8, 0.4], rtol=1e-14)


def test_lsqr_first_iterate_by_hand(tiny):
    # y = beta_1 alpha_1 / (alpha_1^2 + beta_2^2) = sqrt(5)/3.4
    row = lsqr_solve(tiny, 1)
    np.testing.assert_allclose(row.x, np.array([2.0, 1.0]) / 3.4, rtol=1e-14)
    np.testing.assert_allclose(row.residual(tiny), [1 - 4 / 3.4, 1 - 1 / 3.4], rtol=1e-14)
    assert row.resnorm == pytest.approx(0.727606875, rel=1e-8)


def test_exact_solution_at_full_dimension(tiny):
    for method in METHODS:
        np.testing.assert_allclose(solve(method, tiny, 2).x, [0.5, 1.0], rtol=1e-13)


def test_zero_iterate():
    state = bidiagonalize(np.diag([2.0, 1.0]), np.array([3.0, 4.0]), 1)
    for method in METHODS:
        row = solve(method, state, 0)
        assert np.all(row.x == 0) and row.resnorm == pytest.approx(5.0)


def test_bad_requests(tiny):
    with pytest.raises(ValueError):
        solve("gmres", tiny, 1)
    with pytest.raises(ValueError):
        craig_solve(tiny, 3)
    partial = bidiagonalize(np.diag([3.0, 2.0, 1.0]), np.ones(3), 1)
    with pytest.raises(ValueError, match="one more step"):
        lsmr_solve(partial, 1)


def test_lsqr_projected_against_dense_lstsq(rng):
    alphas = rng.uniform(0.5, 2.0, 6)
    betas = rng.uniform(0.5, 2.0, 7)
    L = np.zeros((7, 6))
    L[np.arange(6), np.arange(6)] = alphas
    L[np.arange(1, 7), np.arange(6)] = betas[1:]
    rhs = np.zeros(7)
    rhs[0] = betas[0]
    np.testing.assert_allclose(lsqr_projected(alphas, betas, 6),
                               np.linalg.lstsq(L, rhs, rcond=None)[0], rtol=1e-13)


def test_iterates_match_dense_subspace_oracle(rng):
    A = rng.standard_normal((15, 10))
    b = rng.standard_normal(15)
    state = bidiagonalize(A, b, 8)
    for k in range(1, 8):
        oracle = dense_iterates(A, b, k)
        for method in METHODS:
            x = solve(method, state, k).x
            np.testing.assert_allclose(x, oracle[method], rtol=1e-9, atol=1e-12 * np.linalg.norm(x))


@pytest.mark.parametrize("k", [1, 3, 6])
def test_lsqr_and_lsmr_match_scipy(rng, k):
    A = rng.standard_normal((20, 12))
    b = rng.standard_normal(20)
    state = bidiagonalize(A, b, k + 1)
    ref_lsqr = spla.lsqr(A, b, atol=0, btol=0, conlim=0, iter_lim=k)[0]
    ref_lsmr = spla.lsmr(A, b, atol=0, btol=0, conlim=0, maxiter=k)[0]
    np.testing.assert_allclose(lsqr_solve(state, k).x, ref_lsqr, rtol=1e-10)
    np.testing.assert_allclose(lsmr_solve(state, k).x, ref_lsmr, rtol=1e-10)


def test_minimization_properties_on_shaw(shaw_run):
    _, state = shaw_run
    for k in range(1, 12):
        c, q, m = craig_solve(state, k), lsqr_solve(state, k), lsmr_solve(state, k)
        assert q.resnorm <= c.resnorm * (1 + 1e-12)
        assert m.atresnorm <= q.atresnorm * (1 + 1e-6)


def test_trace_limits(shaw_run):
    problem, state = shaw_run
    tr = solver_trace("lsmr", state, x_true=problem.x_true)
    assert [r.k for r in tr.rows] == list(range(tr.rows[-1].k + 1))
    assert tr.errnorms[0] == pytest.approx(np.linalg.norm(problem.x_true))
    short = solver_trace("craig", state, 4)
    assert len(short.rows) == 5 and np.all(np.isnan(short.errnorms))


def random_state(m, n, seed, steps):
    rng = np.random.default_rng(seed)
    A, b = rng.standard_normal((m, n)), rng.standard_normal(m)
    return A, b, bidiagonalize(A, b, steps)


dims = dict(m=st.integers(6, 14), n=st.integers(5, 10), seed=st.integers(0, 2**32 - 1))


@settings(max_examples=40, deadline=None)
@given(**dims)
def test_craig_residual_is_scaled_left_vector(m, n, seed):
    A, b, state = random_state(m, n, seed, 4)
    phi = phi_factors(state)
    for k in range(4):
        row = craig_solve(state, k)
        r = row.residual(state)
        np.testing.assert_allclose(r, state.s(k + 1) / phi[k], atol=1e-10 * np.linalg.norm(b))
        assert row.resnorm == pytest.approx(1 / abs(phi[k]), rel=1e-9)
        # the iterate solves the modified problem exactly
        np.testing.assert_allclose(A @ row.x, craig_modified_rhs(state, k, phi),
                                   atol=1e-10 * np.linalg.norm(b))


@settings(max_examples=40, deadline=None)
@given(**dims)
def test_residual_coefficients_reconstruct_residuals(m, n, seed):
    A, b, state = random_state(m, n, seed, 5)
    phi, psi = phi_factors(state), psi_factors(state)
    for k in range(4):
        S = state.S[:, :k + 1]
        r_lsqr = lsqr_solve(state, k).residual(state)
        np.testing.assert_allclose(S @ lsqr_residual_coefficients(phi, k), r_lsqr,
                                   atol=1e-10 * np.linalg.norm(b))
        r_lsmr = lsmr_solve(state, k).residual(state)
        coef = lsmr_residual_coefficients(phi, psi, state.alpha_array, k)
        np.testing.assert_allclose(S @ coef, r_lsmr, atol=1e-10 * np.linalg.norm(b))


@settings(max_examples=40, deadline=None)
@given(**dims)
def test_residual_norm_couplings(m, n, seed):
    A, b, state = random_state(m, n, seed, 5)
    phi = phi_factors(state)
    craig = [craig_solve(state, k).resnorm for k in range(5)]
    lsqr = [lsqr_solve(state, k) for k in range(5)]
    for k in range(4):
        coupled = np.sum(np.asarray(craig[:k + 1]) ** -2) ** -0.5
        assert lsqr[k].resnorm == pytest.approx(coupled, rel=1e-9)
        assert lsqr[k].resnorm == pytest.approx(np.sum(phi[:k + 1] ** 2) ** -0.5, rel=1e-9)
        at = np.array([q.atresnorm for q in lsqr[:k + 1]])
        assert lsmr_solve(state, k).atresnorm == pytest.approx(np.sum(at ** -2) ** -0.5, rel=1e-8)


def test_modified_rhs_after_beta_breakdown():
    state = bidiagonalize(np.eye(3), np.array([1.0, 2.0, 2.0]), 3)
    assert state.beta_breakdown
    np.testing.assert_array_equal(craig_modified_rhs(state, 1), state.b)


def test_lsmr_inner_sums_positive_and_decreasing(shaw_run):
    _, state = shaw_run
    phi, psi = phi_factors(state), psi_factors(state)
    k = 10
    terms = psi[:k + 1] / (state.alpha_array[:k + 1] * phi[:k + 1])
    tails = np.cumsum(terms[::-1])[::-1]
    assert np.all(terms > 0)
    assert np.all(np.diff(tails) < 0)


def test_projected_residual_norm_equals_true_residual_norm(shaw_run):
    # S_{k+1} has orthonormal columns, so |p_k| = |b - A x_k| while rounding allows
    _, state = shaw_run
    for k in range(1, 10):
        for method in ("craig", "lsqr"):
            row = solve(method, state, k)
            assert np.linalg.norm(row.p) == pytest.approx(row.resnorm, rel=1e-10)
