import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gknoise.bidiag import bidiagonalize
from gknoise.diagnostics import (cumulative_periodogram, highfreq_fraction, highfreq_power,
                                 lf_component, numerical_rank, power_spectrum, rank_sequence,
                                 residual_noise_match, shifted_factor_curve)
from gknoise.factors import factor_trace, phi_factors
from gknoise.linalg import DimensionError
from gknoise.noise import white_noise
from oracles import naive_dft

finite = st.floats(-1e3, 1e3, allow_nan=False)


@pytest.mark.parametrize("m", [2, 3, 17, 64, 100, 256])
def test_power_matches_naive_dft(m):
    v = np.random.default_rng(m).standard_normal(m)
    ref = np.abs(naive_dft(v)[: m // 2 + 1]) ** 2 / m
    np.testing.assert_allclose(power_spectrum(v).power, ref, rtol=1e-10, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(2, 300), elements=finite))
def test_parseval(v):
    total = power_spectrum(v).total_power()
    assert total == pytest.approx(np.dot(v, v), rel=1e-10, abs=1e-9)


def test_constant_vector_has_only_dc():
    spec = power_spectrum(np.full(16, 3.0))
    assert spec.power[0] == pytest.approx(9.0 * 16)
    np.testing.assert_allclose(spec.power[1:], 0.0, atol=1e-20)
    with pytest.raises(ValueError):
        cumulative_periodogram(np.full(16, 3.0))


def test_pure_tone():
    m = 128
    v = np.cos(2 * np.pi * 5 * np.arange(m) / m)
    spec = power_spectrum(v)
    assert int(np.argmax(spec.power)) == 5
    assert spec.folded[5] == pytest.approx(np.dot(v, v))


def test_highfreq_helpers():
    m = 64
    t = np.arange(m)
    low, high = np.cos(2 * np.pi * 3 * t / m), np.cos(2 * np.pi * 25 * t / m)
    assert highfreq_fraction(low) == pytest.approx(0.0, abs=1e-20)
    assert highfreq_fraction(high) == pytest.approx(1.0)
    assert highfreq_power(high + low) == pytest.approx(np.dot(high, high))
    assert np.isnan(highfreq_fraction(np.zeros(8)))
    with pytest.raises(DimensionError):
        power_spectrum(np.ones(1))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(3, 200), elements=finite), st.floats(1e-3, 1e3))
def test_periodogram_monotone_ends_at_one_and_scale_invariant(v, c):
    if np.sum(power_spectrum(v).power[1:]) <= 1e-12 * max(1.0, np.dot(v, v)):
        return
    cp = cumulative_periodogram(v)
    assert cp.values[-1] == 1.0
    assert np.all(np.diff(cp.values) >= 0)
    np.testing.assert_allclose(cumulative_periodogram(c * v).values, cp.values, rtol=1e-9, atol=1e-12)


def test_periodogram_rejects_zero():
    with pytest.raises(ValueError):
        cumulative_periodogram(np.zeros(10))


def test_periodograms_on_shaw(shaw_run):
    _, state = shaw_run
    k_rev = factor_trace(state).k_rev
    d1 = cumulative_periodogram(state.s(1)).distance()
    d2 = cumulative_periodogram(state.s(2)).distance()
    drev = cumulative_periodogram(state.s(k_rev + 1)).distance()
    assert d1 > 0.3
    assert drev * 2 <= d2


def test_numerical_rank_basics():
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((20, 6)))
    assert numerical_rank(Q) == 6
    assert numerical_rank(np.column_stack([Q, Q[:, 2]])) == 6
    assert numerical_rank(Q[:, 0]) == 1
    with pytest.raises(ValueError):
        numerical_rank(np.zeros((5, 0)))
    with pytest.raises(ValueError):
        numerical_rank(Q, tol=1.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.5), st.floats(0.5, 0.99))
def test_numerical_rank_nonincreasing_in_tol(seed, t1, t2):
    S = np.random.default_rng(seed).standard_normal((12, 8)) * np.logspace(0, -2, 8)
    assert numerical_rank(S, t1) >= numerical_rank(S, t2)


def test_rank_drops_without_reorthogonalization():
    from conftest import noisy_shaw
    P = noisy_shaw()
    state = bidiagonalize(P.A, P.b, 30, "none")
    assert numerical_rank(state.S[:, :30]) < 30
    ranks = rank_sequence(state.S, 30)
    assert np.all(np.diff(ranks) >= 0) and ranks[0] == 1


def test_shifted_curve():
    assert shifted_factor_curve([1.0, -3.0, 2.0], [1, 2, 3]) == [(1, 1.0), (2, 3.0), (3, 2.0)]
    assert shifted_factor_curve([1.0, -3.0, 5.0, 2.0], [1, 2, 2, 3]) == [(1, 1.0), (2, 5.0), (3, 2.0)]
    with pytest.raises(DimensionError):
        shifted_factor_curve([1.0], [1, 2])


def test_shifted_curve_is_unchanged_with_reorthogonalization(shaw_run):
    _, state = shaw_run
    phi = phi_factors(state)[1:]
    ranks = rank_sequence(state.S, phi.size)
    np.testing.assert_array_equal(ranks, np.arange(1, phi.size + 1))
    curve = shifted_factor_curve(phi, ranks)
    np.testing.assert_array_equal([a for _, a in curve], np.abs(phi))


def test_residual_noise_match_edge_cases():
    eta = np.random.default_rng(1).standard_normal(64)
    same = residual_noise_match(eta, eta)
    assert same.l2_diff == 0.0 and not same.defined
    zero = residual_noise_match(eta, np.zeros(64))
    assert zero.l2_diff == pytest.approx(np.linalg.norm(eta))
    assert zero.highfreq_ratio == pytest.approx(highfreq_fraction(eta))
    with pytest.raises(DimensionError):
        residual_noise_match(eta, np.zeros(63))


def test_lf_component(shaw_run):
    problem, state = shaw_run
    phi = phi_factors(state)
    s = state.s(3)
    np.testing.assert_array_equal(lf_component(s, phi[2], np.zeros_like(s)), s)
    k_rev = factor_trace(state).k_rev
    for k in range(1, k_rev + 1):
        lf = lf_component(state.s(k + 1), phi[k], problem.eta)
        total = np.dot(lf, lf) + np.dot(phi[k] * problem.eta, phi[k] * problem.eta)
        assert 0.9 <= total <= 1.1
        assert highfreq_fraction(lf) < 0.1
