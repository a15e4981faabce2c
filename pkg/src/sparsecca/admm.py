"""Linearized ADMM for one convex half of the biconvex problem.

Solves::

    minimize  -c @ u + tau * ||u||_1
    subject to ||A_ball u||_2 <= 1,  A_zero u = 0

by splitting ``z = A u`` where ``A = [A_ball; A_zero]``. The scaled dual
``xi`` is carried across calls so the outer alternation can warm start.
"""

import logging

import numpy as np

from .core import AdmmState
from .prox import ProxFParams, prox_f, prox_g, prox_g_augmented

logger = logging.getLogger(__name__)

STEP_SAFETY = 1.05


class NumericalError(RuntimeError):
    """Raised when an iterate becomes non-finite."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class LinearOperator:
    """A real linear map with its adjoint.

    ``n_ball`` is the number of leading output coordinates constrained to the
    unit ball; any remaining outputs are constrained to zero.
    """

    def __init__(self, apply, apply_transpose, rows, cols, n_ball=None, matrix=None, seed=0):
        self.apply = apply
        self.apply_transpose = apply_transpose
        self.rows = int(rows)
        self.cols = int(cols)
        self.n_ball = self.rows if n_ball is None else int(n_ball)
        self.matrix = matrix
        self.seed = seed
        self._norm = None

    @classmethod
    def from_matrix(cls, M, n_ball=None, seed=0):
        M = np.asarray(M, dtype=float)
        return cls(M.dot, M.T.dot, M.shape[0], M.shape[1], n_ball=n_ball, matrix=M, seed=seed)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def to_dense(self):
        if self.matrix is not None:
            return self.matrix
        return np.column_stack([self.apply(e) for e in np.eye(self.cols)])

    @property
    def spectral_norm_estimate(self):
        if self._norm is None:
            self._norm = estimate_spectral_norm(self, iters=200, seed=self.seed)
        return self._norm

    def ball_norm(self, u):
        """Norm of the ball-constrained part of ``A u``."""
        return float(np.linalg.norm(self.apply(u)[: self.n_ball]))


def estimate_spectral_norm(A, iters=100, seed=0, tol=1e-12):
    """Largest singular value of ``A`` by power iteration on ``A^T A``.

    The estimate ``||A x_k||`` is nondecreasing in ``k`` and never exceeds
    the true value. Iteration stops early once the relative change drops
    below ``tol``.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(A.cols)
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(iters):
        Ax = A.apply(x)
        new = float(np.linalg.norm(Ax))
        if new == 0.0:
            return 0.0
        x = A.apply_transpose(Ax)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return new
        x /= nx
        converged = abs(new - sigma) <= tol * new
        sigma = max(sigma, new)
        if converged:
            break
    return sigma


def admm_parameter(A, lam=None):
    """``lam`` if given, else ``2 * ||A||`` (1 for a zero operator)."""
    if lam is not None:
        return lam
    s = A.spectral_norm_estimate
    return 2.0 * s if s > 0 else 1.0


def step_size(A, lam):
    """Majorisation-safe primal step ``mu = lam / (1.05 ||A||)**2``."""
    s = A.spectral_norm_estimate
    if s == 0.0:
        return 1.0
    return lam / (STEP_SAFETY * s) ** 2


def _project(A, w):
    if A.n_ball == A.rows:
        return prox_g(w)
    return prox_g_augmented(w, A.n_ball)


def subproblem_objective(c, tau, u):
    return float(-np.dot(c, u) + tau * np.abs(u).sum())


def solve_subproblem(A, c, tau, cfg, warm=None):
    """Run linearized ADMM until both residuals fall below ``cfg.inner_tol``.

    Returns ``(u, state)``. ``u`` is rescaled (by at most the residual) so the
    ball constraint holds exactly; ``state`` keeps the raw iterate for warm
    starts.
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (A.cols,):
        raise ValueError(f"c has shape {c.shape}, operator has {A.cols} columns")
    lam = admm_parameter(A, cfg.lam)
    mu = step_size(A, lam) if cfg.auto_step else cfg.mu
    params = ProxFParams(c, mu, tau)

    if warm is None:
        u = np.zeros(A.cols)
        z = np.zeros(A.rows)
        xi = np.zeros(A.rows)
    else:
        u, z, xi = warm.u.copy(), warm.z.copy(), warm.xi.copy()
        if u.shape != (A.cols,) or z.shape != (A.rows,):
            raise ValueError("warm state does not match operator dimensions")

    Au = A.apply(u)
    Atxi = A.apply_transpose(xi)
    grad = A.apply_transpose(Au - z) + Atxi
    primal_hist, dual_hist = [], []
    primal = dual = np.inf
    k = 0
    for k in range(1, cfg.inner_max_iter + 1):
        u_new = prox_f(u - (mu / lam) * grad, params)
        Au_new = A.apply(u_new)
        z_new = _project(A, Au_new + xi)
        r = Au_new - z_new
        xi = xi + r
        Atr = A.apply_transpose(r)
        Atxi_new = Atxi + Atr
        d = (grad - Atxi_new) / lam + (u_new - u) / mu
        primal = float(np.linalg.norm(r))
        dual = float(np.linalg.norm(d))
        if not (np.isfinite(primal) and np.isfinite(dual)):
            raise NumericalError(f"non-finite ADMM iterate at iteration {k}", iteration=k)
        primal_hist.append(primal)
        dual_hist.append(dual)
        grad = Atr + Atxi_new
        u, z, Atxi = u_new, z_new, Atxi_new
        if max(primal, dual) <= cfg.inner_tol:
            break

    state = AdmmState(
        u=u, z=z, xi=xi, iter=k, primal_residual=primal, dual_residual=dual,
        primal_history=primal_hist, dual_history=dual_hist,
    )
    out = u
    nb = A.ball_norm(u)
    if nb > 1.0:
        out = u / nb
    return out, state


def kkt_residual(A, c, tau, u, z, xi, lam=None):
    """Largest violation of the optimality conditions at ``(u, z, xi)``.

    Checks primal feasibility ``A u = z``, stationarity in ``u`` (distance of
    ``c - A^T xi / lam`` from ``tau * d||u||_1``), and the normal-cone
    condition on ``z`` written as the fixed point ``z = P(z + xi)``.
    """
    c = np.asarray(c, dtype=float)
    u, z, xi = (np.asarray(a, dtype=float) for a in (u, z, xi))
    lam = admm_parameter(A, lam)
    primal = np.linalg.norm(A.apply(u) - z)

    w = c - A.apply_transpose(xi) / lam
    nz = u != 0
    stat = np.where(nz, np.abs(w - tau * np.sign(u)), np.maximum(np.abs(w) - tau, 0.0))
    dual = np.linalg.norm(stat)

    ball = z[: A.n_ball]
    infeas = max(np.linalg.norm(ball) - 1.0, 0.0) + np.linalg.norm(z[A.n_ball:])
    slack = np.linalg.norm(z - _project(A, z + xi))
    return float(max(primal, dual, infeas + slack))
