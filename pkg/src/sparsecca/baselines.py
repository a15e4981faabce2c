"""Reference methods: whitened-SVD CCA and the identity-relaxed PMA method."""

import numpy as np
from scipy.sparse.linalg import svds
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import CcaSolution
from .metrics import sample_correlation
from .prox import soft_threshold
from .solver import fix_sign
from .validation import check_views, fit_centering


class SingularGramError(np.linalg.LinAlgError):
    pass


def _inv_sqrt(G, ridge):
    G = 0.5 * (G + G.T) + ridge * np.eye(G.shape[0])
    w, V = np.linalg.eigh(G)
    if w[0] <= 1e-10 * max(w[-1], 1e-300):
        raise SingularGramError(
            "Gram matrix is singular; use ridge > 0 when n <= max(p, q)"
        )
    return (V / np.sqrt(w)) @ V.T


def classical_cca(X, Y, k=1, ridge=0.0):
    """Top-``k`` canonical triplets ``(u, v, rho)`` by SVD of the whitened cross-product.

    ``X`` and ``Y`` should be centred. Weights are scaled so that
    ``u^T (X^T X + ridge I) u = 1``.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if ridge < 0:
        raise ValueError("ridge must be nonnegative")
    Kx = _inv_sqrt(X.T @ X, ridge)
    Ky = _inv_sqrt(Y.T @ Y, ridge)
    M = Kx @ (X.T @ Y) @ Ky
    A, s, Bt = np.linalg.svd(M, full_matrices=False)
    k = min(k, s.size)
    out = []
    for i in range(k):
        u, v = fix_sign(Kx @ A[:, i], Ky @ Bt[i])
        out.append((u, v, float(np.clip(s[i], 0.0, 1.0))))
    return out


def _unit(w):
    nrm = np.linalg.norm(w)
    return w / nrm if nrm > 0 else w


def _leading_right(C):
    if min(C.shape) <= 2:
        return np.linalg.svd(C, full_matrices=False)[2][0]
    _, _, Vt = svds(C, k=1, random_state=0)
    return Vt[0]


def pma_cca(X, Y, tau_u, tau_v, max_iter=500, tol=1e-8, v0=None, C=None):
    """Alternating closed-form updates with ``||u||_2 <= 1``, ``||v||_2 <= 1``.

    Each half-step soft-thresholds the cross-product at ``tau`` and rescales
    to the unit sphere, the exact maximiser of ``u^T a - tau ||u||_1`` over
    the ball. ``v`` starts at the leading right singular vector of
    ``X^T Y`` unless ``v0`` is given; ``C = X^T Y`` may be passed in to
    avoid recomputing it along a grid.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if C is None:
        C = X.T @ Y
    if v0 is None:
        v = _leading_right(C)
    else:
        v = _unit(np.asarray(v0, dtype=float))
    u = np.zeros(C.shape[0])
    zero = converged = False
    it = 0
    history = []
    for it in range(1, max_iter + 1):
        u_new = _unit(soft_threshold(C @ v, tau_u))
        if not np.any(u_new):
            zero = converged = True
            u, v = u_new, np.zeros_like(v)
            break
        v_new = _unit(soft_threshold(C.T @ u_new, tau_v))
        if not np.any(v_new):
            zero = converged = True
            u, v = np.zeros_like(u_new), v_new
            break
        delta = max(np.abs(u_new - u).max(), np.abs(v_new - v).max())
        u, v = u_new, v_new
        history.append(float(-u @ C @ v + tau_u * np.abs(u).sum() + tau_v * np.abs(v).sum()))
        if delta <= tol:
            converged = True
            break
    if zero:
        history.append(0.0)
    u, v = fix_sign(u, v)
    corr = 0.0 if zero else sample_correlation(X, Y, u, v)
    return CcaSolution(
        u_hat=u, v_hat=v, sample_corr=corr, l1_u=float(np.abs(u).sum()),
        l1_v=float(np.abs(v).sum()), converged=converged, outer_iters=it,
        objective_history=history, zero_solution=zero,
    )


def pma_path(X, Y, taus, max_iter=500, tol=1e-8):
    """:func:`pma_cca` over a list of ``(tau_u, tau_v)`` sharing one SVD start."""
    C = np.asarray(X).T @ np.asarray(Y)
    v0 = _leading_right(C)
    return [pma_cca(X, Y, tu, tv, max_iter, tol, v0=v0, C=C) for tu, tv in taus]


class ClassicalCCA(TransformerMixin, BaseEstimator):
    """Unpenalised CCA as an estimator; see :func:`classical_cca`."""

    def __init__(self, n_components=1, ridge=0.0):
        self.n_components = n_components
        self.ridge = ridge

    def fit(self, X, Y):
        X, Y = check_views(X, Y)
        Xs, Ys, self.x_mean_, self.y_mean_ = fit_centering(X, Y)
        trip = classical_cca(Xs, Ys, self.n_components, self.ridge)
        self.x_weights_ = np.column_stack([t[0] for t in trip])
        self.y_weights_ = np.column_stack([t[1] for t in trip])
        self.correlations_ = np.array([t[2] for t in trip])
        return self

    def transform(self, X, Y=None):
        check_is_fitted(self, "x_weights_")
        X, Y = check_views(X, Y)
        xs = (X - self.x_mean_) @ self.x_weights_
        if Y is None:
            return xs
        return xs, (Y - self.y_mean_) @ self.y_weights_


class PMACCA(TransformerMixin, BaseEstimator):
    """Single-pair PMA-style sparse CCA; see :func:`pma_cca`."""

    def __init__(self, tau_u=0.1, tau_v=0.1, max_iter=500, tol=1e-8):
        self.tau_u = tau_u
        self.tau_v = tau_v
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, Y):
        X, Y = check_views(X, Y)
        Xs, Ys, self.x_mean_, self.y_mean_ = fit_centering(X, Y)
        self.solution_ = pma_cca(Xs, Ys, self.tau_u, self.tau_v, self.max_iter, self.tol)
        self.x_weights_ = self.solution_.u_hat[:, None]
        self.y_weights_ = self.solution_.v_hat[:, None]
        return self

    def transform(self, X, Y=None):
        check_is_fitted(self, "x_weights_")
        X, Y = check_views(X, Y)
        xs = (X - self.x_mean_) @ self.x_weights_
        if Y is None:
            return xs
        return xs, (Y - self.y_mean_) @ self.y_weights_
