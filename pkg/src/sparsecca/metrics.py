"""Evaluation quantities: chordal loss, correlations, support recovery, Pareto points."""

import numpy as np


def loss(v_hat, v):
    """Sign-invariant chordal loss ``2 (1 - |<v_hat, v>|)`` on unit vectors.

    Both inputs are normalised first, so the result lies in ``[0, 2]``.
    """
    v_hat = np.asarray(v_hat, dtype=float)
    v = np.asarray(v, dtype=float)
    a, b = np.linalg.norm(v_hat), np.linalg.norm(v)
    if a == 0 or b == 0:
        raise ValueError("loss is undefined for a zero vector")
    c = min(abs(float(v_hat @ v)) / (a * b), 1.0)
    return 2.0 * (1.0 - c)


def loss_min_form(v_hat, v):
    """``min(||v_hat - v||^2, ||v_hat + v||^2)`` after normalisation."""
    v_hat = np.asarray(v_hat, dtype=float) / np.linalg.norm(v_hat)
    v = np.asarray(v, dtype=float) / np.linalg.norm(v)
    return float(min(np.sum((v_hat - v) ** 2), np.sum((v_hat + v) ** 2)))


def _ratio(num, a, b):
    if a <= 0 or b <= 0:
        raise ValueError("correlation is undefined: zero variance projection")
    return float(np.clip(num / (np.sqrt(a) * np.sqrt(b)), -1.0, 1.0))


def sample_correlation(X, Y, u, v):
    """Correlation of the projections ``X u`` and ``Y v`` (uncentered ratio)."""
    xu, yv = X @ u, Y @ v
    return _ratio(float(xu @ yv), float(xu @ xu), float(yv @ yv))


def population_correlation(truth, u, v):
    return _ratio(
        float(u @ truth.Sigma_xy @ v),
        float(u @ truth.Sigma_x @ u),
        float(v @ truth.Sigma_y @ v),
    )


def support_f1(u_hat, u_true, tol=1e-6):
    """F1 score of ``{|u_hat| > tol}`` against the nonzero set of ``u_true``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    est = np.abs(np.asarray(u_hat)) > tol
    true = np.asarray(u_true) != 0
    if not true.any():
        raise ValueError("true support is empty")
    tp = int(np.sum(est & true))
    if tp == 0:
        return 0.0
    precision = tp / est.sum()
    recall = tp / true.sum()
    return float(2 * precision * recall / (precision + recall))


def pareto_point(solution, X, Y, truth=None):
    """Coordinates of a solution for Pareto plots.

    Returns a dict with ``l1_sum``, ``sample_corr`` and, when ``truth`` is
    given, ``population_corr``. Degenerate solutions get ``valid=False`` and
    NaN correlations so they can be dropped from a frontier.
    """
    u, v = solution.u_hat, solution.v_hat
    out = {"l1_sum": float(np.abs(u).sum() + np.abs(v).sum()), "valid": True}
    try:
        out["sample_corr"] = sample_correlation(X, Y, u, v)
    except ValueError:
        out["sample_corr"] = float("nan")
        out["valid"] = False
    if truth is not None:
        try:
            out["population_corr"] = population_correlation(truth, u, v)
        except ValueError:
            out["population_corr"] = float("nan")
            out["valid"] = False
    return out


def true_point(truth, X=None, Y=None):
    """The reference point of the true pair in the same coordinates."""
    u, v = truth.u_true, truth.v_true
    out = {"l1_sum": float(np.abs(u).sum() + np.abs(v).sum()),
           "population_corr": population_correlation(truth, u, v)}
    if X is not None:
        out["sample_corr"] = sample_correlation(X, Y, u, v)
    return out


def pareto_frontier(points):
    """Indices of nondominated points (maximise corr, minimise l1), sorted by l1.

    ``points`` is an ``(m, 2)`` array of ``(corr, l1)``.
    """
    P = np.asarray(points, dtype=float)
    order = np.lexsort((-P[:, 0], P[:, 1]))
    keep, best = [], -np.inf
    for i in order:
        if P[i, 0] > best:
            keep.append(i)
            best = P[i, 0]
    return np.array(keep, dtype=int)


def _point_segment_distance(x, a, b):
    ab = b - a
    denom = ab @ ab
    t = 0.0 if denom == 0 else np.clip((x - a) @ ab / denom, 0.0, 1.0)
    return float(np.linalg.norm(x - (a + t * ab)))


def frontier_distance(target, frontier):
    """Euclidean distance from ``target`` to the polyline through ``frontier``."""
    F = np.asarray(frontier, dtype=float)
    target = np.asarray(target, dtype=float)
    if len(F) == 0:
        return float("inf")
    if len(F) == 1:
        return float(np.linalg.norm(target - F[0]))
    return min(_point_segment_distance(target, F[i], F[i + 1]) for i in range(len(F) - 1))
