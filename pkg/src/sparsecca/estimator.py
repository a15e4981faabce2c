"""scikit-learn style front end for the ADMM sparse CCA solver."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import Dataset, ScaleMode, SolverConfig
from .solver import DeflationContext, orthogonality_residuals, solve_first_pair, solve_rth_pair
from .validation import check_views, fit_centering


class SparseCCA(TransformerMixin, BaseEstimator):
    """Sparse canonical correlation analysis with l1 penalties.

    Each pair solves::

        minimize   -u^T X^T Y v + tau_u ||u||_1 + tau_v ||v||_1
        subject to ||X u||_2 <= 1,  ||Y v||_2 <= 1

    on centred data divided by ``sqrt(n)``, alternating over ``u`` and ``v``
    with a linearized ADMM inner solver. Later pairs are constrained to be
    uncorrelated with earlier ones.

    Parameters
    ----------
    n_components : int, default=1
        Number of canonical pairs.
    tau_u, tau_v : float, default=0.1
        l1 penalties on the ``X`` and ``Y`` weights.
    alpha_x, alpha_y : float, default=1.0
        Bridge weights; the constraint metric is
        ``alpha X^T X + (1 - alpha) I``. Zero gives the unit-ball (PMA)
        constraint.
    lam : float or None, default=None
        ADMM parameter. ``None`` uses twice the operator norm.
    inner_tol, outer_tol : float
        Residual tolerance of the ADMM loop and relative objective change
        of the alternation.
    inner_max_iter, outer_max_iter : int
        Iteration caps.
    init : {"auto", "zeros"} or tuple, default="auto"
        ``"auto"`` starts from the thresholded-SVD heuristic; a tuple
        ``(u0, v0)`` is used as-is for the first pair.
    init_threshold : float or None
        Soft-threshold level for ``"auto"``; ``None`` keeps about the ten
        largest cross-covariance entries.
    n_starts : int, default=10
        Extra coordinate starts at the largest cross-covariance entries,
        screened with short solves against the ``"auto"`` start; the lowest
        objective wins. Zero disables the screening.
    seed : int, default=0
        Seed of the power iteration used to size ADMM steps.

    Attributes
    ----------
    x_weights_, y_weights_ : ndarray of shape (p, n_components), (q, n_components)
        Canonical weights for the centred raw data; the training scores have
        (1/n) variance at most one.
    correlations_ : ndarray of shape (n_components,)
        Sample canonical correlations of the training scores.
    solutions_ : list of CcaSolution
        Per-pair solver diagnostics.
    orthogonality_ : list of float
        Largest constraint violation for pairs after the first.
    """

    def __init__(self, n_components=1, tau_u=0.1, tau_v=0.1, alpha_x=1.0, alpha_y=1.0,
                 lam=None, inner_tol=1e-6, outer_tol=1e-5, inner_max_iter=5000,
                 outer_max_iter=100, init="auto", init_threshold=None, n_starts=10, seed=0):
        self.n_components = n_components
        self.tau_u = tau_u
        self.tau_v = tau_v
        self.alpha_x = alpha_x
        self.alpha_y = alpha_y
        self.lam = lam
        self.inner_tol = inner_tol
        self.outer_tol = outer_tol
        self.inner_max_iter = inner_max_iter
        self.outer_max_iter = outer_max_iter
        self.init = init
        self.init_threshold = init_threshold
        self.n_starts = n_starts
        self.seed = seed

    def _config(self):
        return SolverConfig(
            tau_u=self.tau_u, tau_v=self.tau_v, lam=self.lam, alpha_x=self.alpha_x,
            alpha_y=self.alpha_y, inner_tol=self.inner_tol, outer_tol=self.outer_tol,
            inner_max_iter=self.inner_max_iter, outer_max_iter=self.outer_max_iter,
            n_starts=self.n_starts, seed=self.seed,
        )

    def fit(self, X, Y):
        X, Y = check_views(X, Y)
        if self.n_components < 1:
            raise ValueError("n_components must be >= 1")
        Xs, Ys, self.x_mean_, self.y_mean_ = fit_centering(X, Y)
        data = Dataset(Xs, Ys, centered=True, scale_mode=ScaleMode.UNIT_VARIANCE)
        cfg = self._config()

        sols, ortho = [], []
        sol = solve_first_pair(data, cfg, init=self.init, threshold=self.init_threshold)
        sols.append(sol)
        for _ in range(1, self.n_components):
            ctx = DeflationContext(
                np.column_stack([s.u_hat for s in sols]), np.column_stack([s.v_hat for s in sols])
            )
            init = "zeros" if self.init == "zeros" else "auto"
            sol = solve_rth_pair(data, ctx, cfg, init=init, threshold=self.init_threshold)
            ru, rv = orthogonality_residuals(data, ctx, sol.u_hat, sol.v_hat, cfg)
            ortho.append(float(max(ru.max(), rv.max())))
            sols.append(sol)

        self.solutions_ = sols
        self.orthogonality_ = ortho
        self.x_weights_ = np.column_stack([s.u_hat for s in sols])
        self.y_weights_ = np.column_stack([s.v_hat for s in sols])
        self.correlations_ = np.array([s.sample_corr for s in sols])
        self.n_iter_ = [s.outer_iters for s in sols]
        return self

    def transform(self, X, Y=None):
        """Project centred views onto the canonical weights."""
        check_is_fitted(self, "x_weights_")
        X, Y = check_views(X, Y)
        xs = (X - self.x_mean_) @ self.x_weights_
        if Y is None:
            return xs
        return xs, (Y - self.y_mean_) @ self.y_weights_

    def fit_transform(self, X, Y):
        return self.fit(X, Y).transform(X, Y)
