import numpy as np
import pytest

from sparsecca.simulation import (ScenarioSpec, block_toeplitz_cov, make_truth, replicate_seeds,
                                  sample_joint, sparse_inverse_cov, sparse_inverse_precision,
                                  special_case_eigvecs, special_case_sigma, spiked_cov,
                                  toeplitz_cov, random_orthonormal)


def test_toeplitz_examples():
    np.testing.assert_allclose(toeplitz_cov(3, 0.9), [[1, .9, .81], [.9, 1, .9], [.81, .9, 1]])
    np.testing.assert_array_equal(toeplitz_cov(4, 0.0), np.eye(4))
    assert np.linalg.eigvalsh(toeplitz_cov(100, 0.9)).min() > 0


def test_sparse_inverse_examples():
    om = sparse_inverse_precision(6)
    assert (om[0, 1], om[0, 2], om[0, 3]) == (0.5, 0.4, 0.0)
    S = sparse_inverse_cov(50)
    np.testing.assert_allclose(np.diag(S), 1.0)
    # inverse of the normalised matrix is banded again (D Omega D)
    inv = np.linalg.inv(S)
    d = np.sqrt(np.diag(inv) / np.diag(sparse_inverse_precision(50)))
    np.testing.assert_allclose(inv / np.outer(d, d), sparse_inverse_precision(50), atol=1e-8)


def test_spiked_examples():
    S, W = spiked_cov(10, 2, 250, seed=3)
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(S)), [1] * 8 + [251, 251], atol=1e-9)
    np.testing.assert_allclose(W.T @ W, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(spiked_cov(6, 2, 0.0, 1)[0], np.eye(6))


def test_block_toeplitz_examples():
    B = block_toeplitz_cov(10, 5, 0.7)
    np.testing.assert_allclose(B[:2, :2], [[1, .7], [.7, 1]])
    assert np.all(B[:2, 2:] == 0)
    np.testing.assert_allclose(block_toeplitz_cov(6, 1, 0.7), toeplitz_cov(6, 0.7))
    with pytest.raises(ValueError, match="divide"):
        block_toeplitz_cov(7, 5, 0.7)


def test_scenario_validation():
    with pytest.raises(ValueError):
        ScenarioSpec(family="nope")
    with pytest.raises(ValueError):
        ScenarioSpec(family="block_toeplitz", p=7, q=10)
    with pytest.raises(ValueError):
        ScenarioSpec(family="toeplitz", rho2=0.3)


@pytest.mark.parametrize("family", ["identity", "toeplitz", "sparse_inverse", "spiked", "block_toeplitz"])
def test_truth_invariants(family):
    spec = ScenarioSpec(family=family, n=50, p=40, q=30, s_u=5, s_v=5, rho=0.8, seed=2, spike_k=4)
    t = make_truth(spec)
    assert t.u_true @ t.Sigma_x @ t.u_true == pytest.approx(1, abs=1e-10)
    assert t.v_true @ t.Sigma_y @ t.v_true == pytest.approx(1, abs=1e-10)
    assert t.u_true @ t.Sigma_xy @ t.v_true == pytest.approx(0.8, abs=1e-10)
    assert np.linalg.matrix_rank(t.Sigma_xy) == 1
    assert np.count_nonzero(t.u_true) == 5


def test_identity_nonzeros():
    t = make_truth(ScenarioSpec(p=20, q=20, s_u=4, s_v=4))
    np.testing.assert_allclose(np.abs(t.u_true[t.u_true != 0]), 0.5)


def test_block_toeplitz_fixed_pattern():
    t = make_truth(ScenarioSpec(family="block_toeplitz", p=300, q=300, s_u=5, s_v=5))
    assert np.flatnonzero(t.u_true).tolist() == [0, 5, 10, 15, 20]
    assert t.u_true @ t.Sigma_x @ t.u_true == pytest.approx(1)


def test_toeplitz_high_rho_is_pd():
    make_truth(ScenarioSpec(family="toeplitz", p=30, q=30, rho=0.99))


def test_sampling_moments():
    t = make_truth(ScenarioSpec(family="toeplitz", p=4, q=4, s_u=2, s_v=2, rho=0.9, seed=1))
    d = sample_joint(t, 100_000, seed=5)
    Z = np.hstack([d.X, d.Y])
    assert np.abs(np.cov(Z.T, bias=True) - t.joint).max() <= 0.02


def test_sampling_independent_views():
    t = make_truth(ScenarioSpec(p=4, q=4, s_u=2, s_v=2, rho=0.0, seed=1))
    d = sample_joint(t, 100_000, seed=9)
    assert np.abs(d.X.T @ d.Y / d.n).max() <= 0.05


def test_sampling_deterministic():
    t = make_truth(ScenarioSpec(p=6, q=5, s_u=2, s_v=2))
    a, b = sample_joint(t, 20, 3), sample_joint(t, 20, 3)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.Y, b.Y)
    assert replicate_seeds(1, 0) == replicate_seeds(1, 0) != replicate_seeds(1, 1)


def test_rank_two_truth():
    t = make_truth(ScenarioSpec(p=40, q=40, s_u=5, s_v=5, rho=0.9, rho2=0.5))
    assert not set(np.flatnonzero(t.u_true)) & set(np.flatnonzero(t.u2_true))
    assert t.u2_true @ t.Sigma_xy @ t.v2_true == pytest.approx(0.5)
    assert np.linalg.matrix_rank(t.Sigma_xy) == 2


def test_special_case_examples(rng):
    U = np.array([[1.0], [0.0]])
    ev = np.linalg.eigvalsh(special_case_sigma(U, U, [0.9]))
    np.testing.assert_allclose(ev, [0.1, 1, 1, 1.9], atol=1e-12)
    U, V = random_orthonormal(6, 2, rng), random_orthonormal(6, 2, rng)
    np.testing.assert_array_equal(special_case_sigma(U, V, [0, 0]), np.eye(12))
    with pytest.raises(ValueError):
        special_case_sigma(2 * U, V, [0.5, 0.5])


def test_special_case_eigvecs(rng):
    U, V = random_orthonormal(6, 2, rng), random_orthonormal(6, 2, rng)
    lam = np.array([0.7, 0.2])
    S = special_case_sigma(U, V, lam)
    plus, minus = special_case_eigvecs(U, V)
    np.testing.assert_allclose(S @ plus, plus * (1 + lam), atol=1e-12)
    np.testing.assert_allclose(S @ minus, minus * (1 - lam), atol=1e-12)
