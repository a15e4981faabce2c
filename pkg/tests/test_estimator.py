import numpy as np
import pytest
from sklearn.base import clone

from sparsecca import SparseCCA


def data(seed=0, n=80, p=10, q=8):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(n)
    X = rng.standard_normal((n, p)) + 5
    Y = rng.standard_normal((n, q)) - 2
    X[:, 0] += 2 * z
    Y[:, 1] += 2 * z
    return X, Y


def test_params_and_clone():
    m = SparseCCA(tau_u=0.2, n_components=2)
    assert m.get_params()["tau_u"] == 0.2
    c = clone(m)
    assert c.get_params() == m.get_params()
    m.set_params(tau_v=0.3)
    assert m.tau_v == 0.3


def test_fit_transform():
    X, Y = data()
    m = SparseCCA(tau_u=0.05, tau_v=0.05).fit(X, Y)
    assert m.x_weights_.shape == (10, 1) and m.y_weights_.shape == (8, 1)
    assert np.argmax(np.abs(m.x_weights_[:, 0])) == 0
    assert np.argmax(np.abs(m.y_weights_[:, 0])) == 1
    xs, ys = m.fit_transform(X, Y)
    assert np.corrcoef(xs[:, 0], ys[:, 0])[0, 1] == pytest.approx(m.correlations_[0], abs=1e-8)
    # training scores have (1/n) variance at most one
    assert np.var(xs[:, 0]) <= 1 + 1e-6


def test_two_components():
    X, Y = data(1)
    m = SparseCCA(n_components=2, tau_u=0.02, tau_v=0.02).fit(X, Y)
    assert m.x_weights_.shape == (10, 2)
    assert len(m.orthogonality_) == 1 and m.orthogonality_[0] <= 1e-5


def test_input_checks():
    X, Y = data()
    with pytest.raises(ValueError):
        SparseCCA().fit(X, Y[:-1])
    with pytest.raises(ValueError):
        SparseCCA(n_components=0).fit(X, Y)
    with pytest.raises(Exception):
        SparseCCA().transform(X)
