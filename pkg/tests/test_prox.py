import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sparsecca.prox import ProxFParams, prox_f, prox_g, prox_g_augmented, soft_threshold


def test_prox_f_examples():
    out = prox_f(np.array([1.0]), ProxFParams(np.array([1.0]), 1.0, 0.5))
    assert out[0] == pytest.approx(1.5)
    assert prox_f(np.zeros(3), ProxFParams(np.zeros(3), 1.0, 2.0)).tolist() == [0, 0, 0]
    out = prox_f(np.array([-0.8]), ProxFParams(np.array([0.5]), 1.0, 0.5))
    assert out[0] == 0.0


def test_prox_f_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        prox_f(np.zeros(3), ProxFParams(np.zeros(2), 1.0, 0.1))


def test_prox_params_validation():
    with pytest.raises(ValueError):
        ProxFParams(np.zeros(2), 0.0, 0.1)
    with pytest.raises(ValueError):
        ProxFParams(np.zeros(2), 1.0, -0.1)
    with pytest.raises(ValueError):
        ProxFParams(np.array([np.nan]), 1.0, 0.1)


def test_prox_g_examples():
    np.testing.assert_array_equal(prox_g([0.3, 0.4]), [0.3, 0.4])
    np.testing.assert_allclose(prox_g([3.0, 4.0]), [0.6, 0.8])
    np.testing.assert_array_equal(prox_g([0.0, 0.0]), [0, 0])


def test_prox_g_augmented_examples():
    np.testing.assert_allclose(prox_g_augmented([3.0, 4.0, 7.0], 2), [0.6, 0.8, 0])
    np.testing.assert_array_equal(prox_g_augmented([0.1, 0.2, 0.0], 2), [0.1, 0.2, 0])
    np.testing.assert_array_equal(prox_g_augmented([0.0, 0.0, 5.0], 2), [0, 0, 0])
    with pytest.raises(ValueError):
        prox_g_augmented([1.0], 2)


def subgradient_violation(x, c, mu, tau):
    """How far ``0`` is from the subdifferential of the prox objective at its output."""
    u = prox_f(x, ProxFParams(c, mu, tau))
    w = x + mu * c - u
    nz = u != 0
    viol = np.where(nz, np.abs(w - mu * tau * np.sign(u)), np.maximum(np.abs(w) - mu * tau, 0))
    scale = max(1.0, np.abs(x).max(initial=0), np.abs(mu * c).max(initial=0))
    return viol.max(initial=0) / scale


def test_subgradient_conditions_random():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        p = rng.integers(1, 20)
        x = rng.standard_normal(p) * rng.choice([0.01, 1, 100])
        c = rng.standard_normal(p)
        mu = float(rng.uniform(1e-3, 10))
        tau = float(rng.uniform(0, 3))
        assert subgradient_violation(x, c, mu, tau) <= 1e-12
        z = rng.standard_normal(p) * rng.choice([1e-3, 1, 1e6])
        assert np.linalg.norm(prox_g(z)) <= 1.0
        nb = int(rng.integers(0, p + 1))
        assert np.linalg.norm(prox_g_augmented(z, nb)) <= 1.0


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(arrays(np.float64, st.integers(1, 12), elements=finite), st.floats(1e-3, 10),
       st.floats(0, 5), st.integers(0, 2**31))
def test_prox_f_property(x, mu, tau, seed):
    c = np.random.default_rng(seed).standard_normal(x.shape)
    assert subgradient_violation(x, c, mu, tau) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(arrays(np.float64, st.integers(1, 12), elements=finite))
def test_prox_g_property(z):
    out = prox_g(z)
    assert np.linalg.norm(out) <= 1.0
    if np.linalg.norm(z) <= 1.0:
        np.testing.assert_array_equal(out, z)
    else:
        # radial: same direction
        assert np.dot(out, z) == pytest.approx(np.linalg.norm(z), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.integers(1, 10), elements=finite), st.floats(0, 1e3))
def test_soft_threshold_shrinks(x, t):
    s = soft_threshold(x, t)
    assert np.all(np.abs(s) <= np.abs(x))
    assert np.all(s * x >= 0)
