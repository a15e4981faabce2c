import numpy as np
import pytest

from sparsecca.admm import (LinearOperator, NumericalError, admm_parameter, estimate_spectral_norm,
                            kkt_residual, solve_subproblem, step_size, subproblem_objective)
from sparsecca.core import SolverConfig

from oracles import cvxpy_subproblem, enumerate_kkt

CFG = SolverConfig(inner_tol=1e-9, inner_max_iter=200000)


def op(M, n_ball=None):
    return LinearOperator.from_matrix(np.asarray(M, dtype=float), n_ball=n_ball)


def test_spectral_norm_examples(rng):
    assert estimate_spectral_norm(op(np.eye(5))) == pytest.approx(1.0, abs=1e-8)
    assert estimate_spectral_norm(op(np.diag([3.0, 1.0]))) == pytest.approx(3.0, abs=1e-8)
    M = rng.standard_normal((20, 10))
    est = estimate_spectral_norm(op(M), iters=2000)
    assert est == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-6)
    assert estimate_spectral_norm(op(np.zeros((3, 2)))) == 0.0


def test_spectral_norm_never_overshoots(rng):
    for seed in range(10):
        M = rng.standard_normal((15, 8))
        assert estimate_spectral_norm(op(M), iters=5, seed=seed) <= np.linalg.norm(M, 2) * (1 + 1e-12)


def test_step_size_majorizes():
    A = op(np.diag([3.0, 1.0]))
    lam = admm_parameter(A)
    assert lam == pytest.approx(6.0)
    assert step_size(A, lam) * 3.0**2 <= lam
    assert admm_parameter(A, 1.0) == 1.0


def test_zero_linear_term_gives_zero(rng):
    A = op(rng.standard_normal((30, 4)))
    u, state = solve_subproblem(A, np.zeros(4), 0.3, CFG)
    np.testing.assert_array_equal(u, 0)
    assert kkt_residual(A, np.zeros(4), 0.3, u, state.z, state.xi) <= 1e-10


def test_identity_linear_functional():
    A = op(np.eye(3))
    u, _ = solve_subproblem(A, np.array([2.0, 0, 0]), 0.0, CFG)
    np.testing.assert_allclose(u, [1, 0, 0], atol=1e-6)


def test_rejects_bad_shapes(rng):
    A = op(rng.standard_normal((10, 3)))
    with pytest.raises(ValueError):
        solve_subproblem(A, np.zeros(4), 0.1, CFG)


def test_nonfinite_raises():
    A = op(np.eye(2))
    with pytest.raises((NumericalError, ValueError)):
        solve_subproblem(A, np.array([np.inf, 0.0]), 0.1, CFG)


def test_matches_enumeration_and_cvxpy(rng):
    for _ in range(5):
        M = rng.standard_normal((50, 5)) / np.sqrt(50)
        c = rng.standard_normal(5)
        u, state = solve_subproblem(op(M), c, 0.5, CFG)
        _, ref = enumerate_kkt(M, c, 0.5)
        _, ref_cvx = cvxpy_subproblem(M, c, 0.5)
        assert subproblem_objective(c, 0.5, u) == pytest.approx(ref, abs=1e-4)
        assert ref == pytest.approx(ref_cvx, abs=1e-5)
        assert kkt_residual(op(M), c, 0.5, state.u, state.z, state.xi) <= 10 * CFG.inner_tol


def test_kkt_detects_perturbation(rng):
    M = rng.standard_normal((50, 5)) / np.sqrt(50)
    c = rng.standard_normal(5)
    cfg = SolverConfig(inner_tol=1e-6)
    _, state = solve_subproblem(op(M), c, 0.5, cfg)
    bad = state.u + 0.1
    assert kkt_residual(op(M), c, 0.5, bad, state.z, state.xi) > cfg.inner_tol


def test_feasible_at_exit(rng):
    for _ in range(10):
        M = rng.standard_normal((40, 8)) / np.sqrt(40)
        A = op(M)
        u, _ = solve_subproblem(A, rng.standard_normal(8) * 3, 0.1, SolverConfig(inner_max_iter=50))
        assert np.linalg.norm(M @ u) <= 1 + 1e-6


def test_warm_start_converges_fast(rng):
    M = rng.standard_normal((50, 6)) / np.sqrt(50)
    c = rng.standard_normal(6)
    cfg = SolverConfig(inner_tol=1e-8, inner_max_iter=100000)
    _, state = solve_subproblem(op(M), c, 0.2, cfg)
    _, again = solve_subproblem(op(M), c, 0.2, cfg, warm=state)
    assert again.iter <= 5


def test_residual_histories(rng):
    M = rng.standard_normal((30, 4))
    _, state = solve_subproblem(op(M), rng.standard_normal(4), 0.1, SolverConfig())
    assert len(state.primal_history) == state.iter
    assert state.primal_residual == state.primal_history[-1]


def test_augmented_constraint(rng):
    M = rng.standard_normal((40, 5)) / np.sqrt(40)
    G = rng.standard_normal((1, 5))
    A = op(np.vstack([M, G]), n_ball=40)
    c = rng.standard_normal(5)
    u, _ = solve_subproblem(A, c, 0.1, CFG)
    _, ref = cvxpy_subproblem(M, c, 0.1, G=G)
    assert abs(G @ u).max() <= 1e-6
    assert subproblem_objective(c, 0.1, u) == pytest.approx(ref, abs=1e-4)
