import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gknoise.linalg import (DimensionError, LinearOperator, MatrixOperator, RankDeficientError,
                            adjoint_mismatch, aslinearoperator, dense_lstsq, identity,
                            pseudoinverse_solve, read_matrix_market, read_vector,
                            write_matrix_market, write_vector)


def test_matrix_operator_matches_dense_products(rng):
    A = rng.standard_normal((7, 4))
    op = MatrixOperator(A)
    x, y = rng.standard_normal(4), rng.standard_normal(7)
    np.testing.assert_array_equal(op.matvec(x), A @ x)
    np.testing.assert_array_equal(op.rmatvec(y), A.T @ y)
    np.testing.assert_array_equal(op @ x, A @ x)
    assert op.T.shape == (4, 7)
    np.testing.assert_allclose(op.T.matvec(y), A.T @ y)


def test_operator_is_immutable_and_copies_input(rng):
    A = rng.standard_normal((3, 3))
    op = MatrixOperator(A)
    A[0, 0] = 99.0
    assert op.dense[0, 0] != 99.0
    with pytest.raises(AttributeError):
        op.shape = (2, 2)
    with pytest.raises(ValueError):
        op.dense[0, 0] = 1.0


def test_dimension_checks():
    op = identity(3)
    with pytest.raises(DimensionError):
        op.matvec(np.ones(4))
    with pytest.raises(DimensionError):
        op.rmatvec(np.ones(2))


def test_function_pair_operator_and_todense(rng):
    A = rng.standard_normal((5, 3))
    op = LinearOperator((5, 3), lambda x: A @ x, lambda y: A.T @ y)
    np.testing.assert_allclose(op.todense(), A)
    assert adjoint_mismatch(op) < 1e-14
    np.testing.assert_allclose(op.fro_norm_estimate(samples=400), np.linalg.norm(A), rtol=0.2)


def test_adjoint_mismatch_detects_wrong_transpose(rng):
    A = rng.standard_normal((4, 4))
    bad = LinearOperator((4, 4), lambda x: A @ x, lambda y: A @ y)
    assert adjoint_mismatch(bad) > 1e-3


def test_pseudoinverse_on_rank_one():
    A = np.outer([1.0, 2.0], [3.0, 4.0])
    x = pseudoinverse_solve(A, np.array([1.0, 2.0]))
    # minimum-norm solution lies in the row space
    np.testing.assert_allclose(A @ x, [1.0, 2.0])
    np.testing.assert_allclose(x / np.linalg.norm(x), np.array([3.0, 4.0]) / 5.0)


def test_dense_lstsq_against_numpy(rng):
    A = rng.standard_normal((9, 4))
    b = rng.standard_normal(9)
    np.testing.assert_allclose(dense_lstsq(A, b), np.linalg.lstsq(A, b, rcond=None)[0], rtol=1e-12)


def test_dense_lstsq_rejects_rank_deficient():
    A = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(RankDeficientError):
        dense_lstsq(A, np.ones(3))


def test_aslinearoperator_rejects_non_matrix():
    with pytest.raises(DimensionError):
        aslinearoperator(np.ones(3))


@pytest.mark.parametrize("fmt", ["array", "coordinate"])
def test_matrix_market_roundtrip_is_exact(tmp_path, rng, fmt):
    A = rng.standard_normal((6, 5))
    A[1, 2] = 0.0
    path = tmp_path / "A.mtx"
    write_matrix_market(path, A, fmt)
    header = path.read_text().splitlines()[0]
    assert header.startswith("%%MatrixMarket matrix")
    np.testing.assert_array_equal(read_matrix_market(path), A)


def test_vector_roundtrip(tmp_path, rng):
    v = rng.standard_normal(11)
    write_vector(tmp_path / "v.mtx", v)
    np.testing.assert_array_equal(read_vector(tmp_path / "v.mtx"), v)


@settings(max_examples=30, deadline=None)
@given(m=st.integers(1, 8), n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_adjoint_identity_holds_for_matrix_operators(m, n, seed):
    A = np.random.default_rng(seed).standard_normal((m, n))
    assert adjoint_mismatch(MatrixOperator(A), trials=5, seed=seed) < 1e-13
