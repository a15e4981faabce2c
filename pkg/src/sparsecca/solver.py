"""Biconvex alternation, initialisation, covariance bridge and deflation."""

import logging
from dataclasses import dataclass

import numpy as np

from .admm import LinearOperator, solve_subproblem
from .core import AdmmState, CcaSolution
from .metrics import sample_correlation
from .prox import prox_g, soft_threshold

logger = logging.getLogger(__name__)

_NULL_TOL = 1e-12
SCREEN_INNER_TOL = 1e-2
SCREEN_OUTER_TOL = 1e-3
SCREEN_OUTER_ITER = 20
# relative objective gain a screened start needs to replace the warm continuation
SWITCH_MARGIN = 1e-3


def fix_sign(u, v):
    """Flip ``(u, v)`` jointly so the largest-magnitude entry of ``u`` is >= 0."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.size == 0 or not np.any(u):
        return u, v
    i = int(np.argmax(np.abs(u)))
    if u[i] < 0:
        return -u, -v
    return u, v


def bridge_operator(X, alpha=1.0, p=None, seed=0):
    """Operator ``A`` with ``||A u||^2 = alpha ||X u||^2 + (1 - alpha) ||u||^2``.

    ``alpha = 1`` returns ``X`` itself and ``alpha = 0`` the identity.
    """
    X = np.asarray(X, dtype=float)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    n, p_ = X.shape
    if p is not None and p != p_:
        raise ValueError(f"p={p} does not match X with {p_} columns")
    if alpha == 1.0:
        return LinearOperator.from_matrix(X, seed=seed)
    if alpha == 0.0:
        return LinearOperator(lambda u: np.array(u, dtype=float), lambda w: np.array(w, dtype=float),
                              p_, p_, matrix=np.eye(p_), seed=seed)
    a, b = np.sqrt(alpha), np.sqrt(1.0 - alpha)

    def apply(u):
        return np.concatenate([a * (X @ u), b * u])

    def apply_t(w):
        return a * (X.T @ w[:n]) + b * w[n:]

    return LinearOperator(apply, apply_t, n + p_, p_, seed=seed)


def gram_rows(op, U):
    """Rows ``U^T A^T A`` expressing the orthogonality constraint in ``op``'s metric."""
    U = np.atleast_2d(U)
    return np.vstack([op.apply_transpose(op.apply(U[:, j])) for j in range(U.shape[1])])


def augmented_operator(op, G):
    """Stack ``op`` over the constraint rows ``G``; the extra outputs must be zero."""
    G = np.atleast_2d(np.asarray(G, dtype=float))
    m = op.rows

    def apply(u):
        return np.concatenate([op.apply(u), G @ u])

    def apply_t(w):
        return op.apply_transpose(w[:m]) + G.T @ w[m:]

    return LinearOperator(apply, apply_t, m + G.shape[0], op.cols, n_ball=m, seed=op.seed)


def default_threshold(C):
    """Keep roughly the ten largest entries of ``|C|``."""
    a = np.abs(C).ravel()
    k = min(10, a.size)
    return float(np.partition(a, a.size - k - 1)[a.size - k - 1]) if a.size > k else 0.0


def _null_projector(G, dim):
    if G is None or np.size(G) == 0:
        return None
    G = np.atleast_2d(G)
    return np.eye(dim) - np.linalg.pinv(G, rcond=1e-10) @ G


def initialize(X, Y, threshold=None, Gu=None, Gv=None, op_u=None, op_v=None):
    """Starting pair from a soft-thresholded cross-product.

    1. Soft-threshold ``X^T Y`` elementwise.
    2. Take the singular vectors and rescale each so ``||X u_i|| = 1`` and
       ``||Y v_i|| = 1``; vectors in the null space of ``X`` (or ``Y``) are
       dropped.
    3. Return the pair with the largest ``u_i^T X^T Y v_i``.

    With constraint rows ``Gu``/``Gv`` the cross-product is first projected
    onto their null spaces, so the candidates satisfy ``Gu u = 0``.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    C = X.T @ Y
    Pu, Pv = _null_projector(Gu, X.shape[1]), _null_projector(Gv, Y.shape[1])
    if Pu is not None:
        C = Pu @ C
    if Pv is not None:
        C = C @ Pv
    if threshold is None:
        threshold = default_threshold(C)
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    S = soft_threshold(C, threshold)

    norm_u = (lambda w: np.linalg.norm(op_u.apply(w)[: op_u.n_ball])) if op_u else (lambda w: np.linalg.norm(X @ w))
    norm_v = (lambda w: np.linalg.norm(op_v.apply(w)[: op_v.n_ball])) if op_v else (lambda w: np.linalg.norm(Y @ w))

    rows = np.flatnonzero(np.any(S != 0, axis=1))
    cols = np.flatnonzero(np.any(S != 0, axis=0))
    best, best_val = None, -np.inf
    if rows.size:
        Us, sv, Vts = np.linalg.svd(S[np.ix_(rows, cols)], full_matrices=False)
        for i in np.flatnonzero(sv > sv[0] * 1e-12):
            u = np.zeros(X.shape[1])
            v = np.zeros(Y.shape[1])
            u[rows] = Us[:, i]
            v[cols] = Vts[i]
            du, dv = norm_u(u), norm_v(v)
            if du <= _NULL_TOL or dv <= _NULL_TOL:
                continue
            u, v = u / du, v / dv
            val = float((X @ u) @ (Y @ v))
            if val > best_val:
                best, best_val = (u, v), val
    if best is None:
        logger.info("initialisation fallback: leading singular pair of the cross-product")
        Uc, _, Vtc = np.linalg.svd(C, full_matrices=False)
        best = (Uc[:, 0], Vtc[0])
    return best


def biconvex_objective(X, Y, u, v, tau_u, tau_v):
    return float(-(X @ u) @ (Y @ v) + tau_u * np.abs(u).sum() + tau_v * np.abs(v).sum())


def _warm(op, w):
    Aw = op.apply(w)
    z = prox_g(Aw) if op.n_ball == op.rows else np.concatenate([prox_g(Aw[: op.n_ball]), np.zeros(op.rows - op.n_ball)])
    return AdmmState(u=w.copy(), z=z, xi=np.zeros(op.rows))


@dataclass
class PairState:
    """Warm-start information carried along a regularisation path."""

    u: np.ndarray
    v: np.ndarray
    su: AdmmState = None
    sv: AdmmState = None


def alternate(X, Y, op_u, op_v, cfg, u0, v0, warm=None):
    """Alternate the two ADMM subproblems from ``(u0, v0)``.

    Returns ``(CcaSolution, PairState)``; the state can seed the next solve
    on a regularisation path.
    """
    u, v = np.asarray(u0, dtype=float), np.asarray(v0, dtype=float)
    su = warm.su if warm is not None and warm.su is not None else _warm(op_u, u)
    sv = warm.sv if warm is not None and warm.sv is not None else _warm(op_v, v)
    history = []
    converged = zero = False
    inner = 0
    it = 0
    for it in range(1, cfg.outer_max_iter + 1):
        u, su = solve_subproblem(op_u, X.T @ (Y @ v), cfg.tau_u, cfg, warm=su)
        inner += su.iter
        if not np.any(u):
            v = np.zeros_like(v)
            history.append(0.0)
            converged = zero = True
            break
        v, sv = solve_subproblem(op_v, Y.T @ (X @ u), cfg.tau_v, cfg, warm=sv)
        inner += sv.iter
        if not np.any(v):
            u = np.zeros_like(u)
            history.append(0.0)
            converged = zero = True
            break
        obj = biconvex_objective(X, Y, u, v, cfg.tau_u, cfg.tau_v)
        history.append(obj)
        if len(history) > 1:
            prev = history[-2]
            if abs(obj - prev) <= cfg.outer_tol * max(abs(prev), 1e-12):
                converged = True
                break

    state = PairState(u=u.copy(), v=v.copy(), su=su, sv=sv)
    u, v = fix_sign(u, v)
    if zero:
        corr = 0.0
    else:
        corr = sample_correlation(X, Y, u, v)
    sol = CcaSolution(
        u_hat=u, v_hat=v, sample_corr=corr,
        l1_u=float(np.abs(u).sum()), l1_v=float(np.abs(v).sum()),
        converged=converged, outer_iters=it, objective_history=history,
        zero_solution=zero, primal_residual_u=su.primal_residual,
        primal_residual_v=sv.primal_residual, inner_iters=inner,
    )
    return sol, state


def _operators(data, cfg):
    return (bridge_operator(data.X, cfg.alpha_x, seed=cfg.seed),
            bridge_operator(data.Y, cfg.alpha_y, seed=cfg.seed))


def entry_starts(X, Y, k, op_u=None, op_v=None, Gu=None, Gv=None):
    """Coordinate starts at the ``k`` largest entries of ``|X^T Y|``.

    Each start pairs ``e_i`` with ``sign(C_ij) e_j``, using every row and
    column at most once, scaled to the boundary of the constraint ball.
    With constraint rows the coordinate vectors are first projected onto
    their null spaces.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    p, q = X.shape[1], Y.shape[1]
    C = X.T @ Y
    Pu, Pv = _null_projector(Gu, p), _null_projector(Gv, q)
    if Pu is not None:
        C = Pu @ C
    if Pv is not None:
        C = C @ Pv
    norm_u = (lambda w: op_u.ball_norm(w)) if op_u else (lambda w: np.linalg.norm(X @ w))
    norm_v = (lambda w: op_v.ball_norm(w)) if op_v else (lambda w: np.linalg.norm(Y @ w))
    starts, rows, cols = [], set(), set()
    if k <= 0:
        return starts
    for flat in np.argsort(-np.abs(C), axis=None, kind="stable"):
        i, j = divmod(int(flat), q)
        if C[i, j] == 0 or len(starts) >= k:
            break
        if i in rows or j in cols:
            continue
        rows.add(i)
        cols.add(j)
        u, v = np.zeros(p), np.zeros(q)
        u[i], v[j] = 1.0, np.sign(C[i, j])
        if Pu is not None:
            u = Pu @ u
        if Pv is not None:
            v = Pv @ v
        du, dv = norm_u(u), norm_v(v)
        if du > _NULL_TOL and dv > _NULL_TOL:
            starts.append((u / du, v / dv))
    return starts


def _starts(data, init, op_u, op_v, cfg, threshold=None, Gu=None, Gv=None):
    if init is None or (isinstance(init, str) and init == "auto"):
        first = initialize(data.X, data.Y, threshold, Gu=Gu, Gv=Gv, op_u=op_u, op_v=op_v)
        return [first] + entry_starts(data.X, data.Y, cfg.n_starts, op_u, op_v, Gu, Gv)
    if isinstance(init, str) and init == "zeros":
        ones = np.ones(data.q)
        if Gv is not None:
            ones = _null_projector(Gv, data.q) @ ones
        return [(np.zeros(data.p), ones / max(op_v.ball_norm(ones), _NULL_TOL))]
    if isinstance(init, str):
        raise ValueError(f"unknown init {init!r}")
    u0, v0 = init
    return [(np.asarray(u0, dtype=float), np.asarray(v0, dtype=float))]


def solution_objective(X, Y, sol, cfg):
    if sol.zero_solution:
        return 0.0
    return biconvex_objective(X, Y, sol.u_hat, sol.v_hat, cfg.tau_u, cfg.tau_v)


def screen_starts(X, Y, op_u, op_v, cfg, starts):
    """Short, loose solves from every start; returns ``(best index, objectives)``."""
    loose = cfg.replace(
        inner_tol=max(cfg.inner_tol, SCREEN_INNER_TOL),
        outer_tol=max(cfg.outer_tol, SCREEN_OUTER_TOL),
        outer_max_iter=min(cfg.outer_max_iter, SCREEN_OUTER_ITER),
    )
    vals = [solution_objective(X, Y, alternate(X, Y, op_u, op_v, loose, u0, v0)[0], loose)
            for u0, v0 in starts]
    return int(np.argmin(vals)), vals


def _solve_from(data, op_u, op_v, cfg, starts, warm=None):
    if warm is not None:
        u0, v0 = warm.u, warm.v
    elif len(starts) > 1:
        u0, v0 = starts[screen_starts(data.X, data.Y, op_u, op_v, cfg, starts)[0]]
    else:
        u0, v0 = starts[0]
    return alternate(data.X, data.Y, op_u, op_v, cfg, u0, v0, warm=warm)[0]


def solve_first_pair(data, cfg, init=None, threshold=None, warm=None):
    """Leading sparse canonical pair of a centred, scaled :class:`Dataset`.

    ``init`` is ``None``/``"auto"`` (thresholded-SVD start plus
    ``cfg.n_starts`` coordinate starts, screened by objective), ``"zeros"``
    (cold ADMM state, flat ``v``) or an explicit ``(u0, v0)`` pair.
    """
    op_u, op_v = _operators(data, cfg)
    starts = None if warm is not None else _starts(data, init, op_u, op_v, cfg, threshold)
    return _solve_from(data, op_u, op_v, cfg, starts, warm)


@dataclass
class DeflationContext:
    """Previously found pairs, one per column."""

    U_prev: np.ndarray
    V_prev: np.ndarray

    def __post_init__(self):
        self.U_prev = np.atleast_2d(np.asarray(self.U_prev, dtype=float))
        self.V_prev = np.atleast_2d(np.asarray(self.V_prev, dtype=float))
        if self.U_prev.shape[1] != self.V_prev.shape[1]:
            raise ValueError("U_prev and V_prev must have the same number of columns")

    @property
    def r(self):
        return self.U_prev.shape[1] + 1


def deflated_operators(data, ctx, cfg):
    base_u, base_v = _operators(data, cfg)
    Gu, Gv = gram_rows(base_u, ctx.U_prev), gram_rows(base_v, ctx.V_prev)
    return augmented_operator(base_u, Gu), augmented_operator(base_v, Gv), Gu, Gv


def solve_rth_pair(data, ctx, cfg, init=None, threshold=None, warm=None):
    """Next canonical pair subject to ``U_prev^T X^T X u = 0`` (and likewise for ``v``)."""
    if ctx.U_prev.shape[0] != data.p or ctx.V_prev.shape[0] != data.q:
        raise ValueError("deflation context does not match data dimensions")
    op_u, op_v, Gu, Gv = deflated_operators(data, ctx, cfg)
    starts = None if warm is not None else _starts(data, init, op_u, op_v, cfg, threshold, Gu, Gv)
    return _solve_from(data, op_u, op_v, cfg, starts, warm)


def orthogonality_residuals(data, ctx, u, v, cfg=None):
    """``|U_prev^T X^T X u|`` and ``|V_prev^T Y^T Y v|`` in the solver's metric."""
    alpha_x = cfg.alpha_x if cfg else 1.0
    alpha_y = cfg.alpha_y if cfg else 1.0
    bu, bv = bridge_operator(data.X, alpha_x), bridge_operator(data.Y, alpha_y)
    return np.abs(gram_rows(bu, ctx.U_prev) @ u), np.abs(gram_rows(bv, ctx.V_prev) @ v)


def solve_path(data, taus, cfg, init=None, threshold=None, ctx=None):
    """Solve along a list of ``(tau_u, tau_v)``, warm starting each from the last.

    ``taus`` is visited from the largest penalty to the smallest; results are
    returned in the caller's order. With several starts, each penalty also
    screens the cold starts and switches to one whose objective beats the
    warm continuation.
    """
    taus = [tuple(map(float, t)) for t in taus]
    order = sorted(range(len(taus)), key=lambda i: (-(taus[i][0] + taus[i][1]), i))
    if ctx is None:
        op_u, op_v = _operators(data, cfg)
        Gu = Gv = None
    else:
        op_u, op_v, Gu, Gv = deflated_operators(data, ctx, cfg)
    starts = _starts(data, init, op_u, op_v, cfg, threshold, Gu, Gv)
    X, Y = data.X, data.Y
    results = [None] * len(taus)
    warm = None
    for i in order:
        tu, tv = taus[i]
        c = cfg.replace(tau_u=tu, tau_v=tv)
        best = None
        if warm is not None and np.any(warm.u) and np.any(warm.v):
            sol, state = alternate(X, Y, op_u, op_v, c, warm.u, warm.v, warm=warm)
            best = (solution_objective(X, Y, sol, c), sol, state)
        k, vals = screen_starts(X, Y, op_u, op_v, c, starts) if len(starts) > 1 else (0, [-np.inf])
        if best is None or vals[k] < best[0] - SWITCH_MARGIN * max(abs(best[0]), 1e-3):
            sol, state = alternate(X, Y, op_u, op_v, c, *starts[k])
            obj = solution_objective(X, Y, sol, c)
            if best is None or obj < best[0]:
                best = (obj, sol, state)
        _, results[i], warm = best
    return results
