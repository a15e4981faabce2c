import numpy as np
import pytest

from sparsecca.core import CcaSolution
from sparsecca.metrics import (frontier_distance, loss, loss_min_form, pareto_frontier,
                               pareto_point, population_correlation, sample_correlation,
                               support_f1, true_point)
from sparsecca.simulation import ScenarioSpec, make_truth


def test_loss_examples():
    v = np.array([3.0, 4.0])
    assert loss(v, v) == 0
    assert loss(-v, v) == 0
    assert loss([0.8, 0.6], [1.0, 0.0]) == pytest.approx(0.4)
    with pytest.raises(ValueError):
        loss(np.zeros(2), v)


def test_loss_properties(rng):
    for _ in range(100):
        a, b = rng.standard_normal(7), rng.standard_normal(7)
        assert loss(a, b) == loss(-a, b) == loss(a, -b)
        assert 0 <= loss(a, b) <= 2
        assert loss(a, b) == pytest.approx(loss_min_form(a, b), abs=1e-12)
    assert loss([1.0, 0], [0, 1.0]) == 2


def test_sample_correlation_examples(rng):
    X = rng.standard_normal((20, 3))
    u = rng.standard_normal(3)
    assert sample_correlation(X, X, u, u) == pytest.approx(1)
    Y = np.zeros((20, 1))
    xu = X @ u
    y = rng.standard_normal(20)
    Y[:, 0] = y - (y @ xu) / (xu @ xu) * xu
    assert sample_correlation(X, Y, u, np.ones(1)) == pytest.approx(0, abs=1e-12)
    assert sample_correlation(X, X, 3 * u, 0.5 * u) == pytest.approx(1)
    with pytest.raises(ValueError):
        sample_correlation(X, X, np.zeros(3), u)


def test_population_correlation_examples():
    t = make_truth(ScenarioSpec(family="toeplitz", p=50, q=50, rho=0.9, seed=4))
    assert population_correlation(t, t.u_true, t.v_true) == pytest.approx(0.9)
    rng = np.random.default_rng(0)
    w = rng.standard_normal(50)
    w -= (w @ t.Sigma_y @ t.v_true) * t.v_true
    assert population_correlation(t, t.u_true, w) == pytest.approx(0, abs=1e-10)
    for _ in range(1000):
        a, b = rng.standard_normal(50), rng.standard_normal(50)
        assert abs(population_correlation(t, a, b)) <= 0.9 + 1e-12


def test_support_f1_examples():
    u = np.zeros(10)
    u[:5] = 1
    assert support_f1(u, u) == 1
    w = np.zeros(10)
    w[5:] = 1
    assert support_f1(w, u) == 0
    extra = u.copy()
    extra[7] = 0.3
    assert support_f1(extra, u) == pytest.approx(10 / 11)
    with pytest.raises(ValueError):
        support_f1(u, np.zeros(10))


def test_pareto_points():
    t = make_truth(ScenarioSpec(p=10, q=10, s_u=2, s_v=2, rho=0.9))
    X = np.random.default_rng(0).standard_normal((30, 10))
    zero = CcaSolution(np.zeros(10), np.zeros(10), 0.0, 0, 0, True, 1, zero_solution=True)
    pt = pareto_point(zero, X, X, t)
    assert not pt["valid"] and pt["l1_sum"] == 0
    red = true_point(t)
    assert red["population_corr"] == pytest.approx(0.9)
    assert red["l1_sum"] == pytest.approx(np.abs(t.u_true).sum() + np.abs(t.v_true).sum())


def test_frontier():
    P = np.array([[0.5, 1.0], [0.4, 2.0], [0.9, 3.0], [0.95, 5.0]])
    idx = pareto_frontier(P)
    assert idx.tolist() == [0, 2, 3]
    assert frontier_distance([0.7, 2.0], P[idx]) == pytest.approx(0.0, abs=1e-12)
    assert frontier_distance([0.5, 1.0], P[:1]) == 0
    assert frontier_distance([0.0, 0.0], np.zeros((0, 2))) == np.inf
