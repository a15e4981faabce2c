"""Closed-form proximal maps used by the inner ADMM solver."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ProxFParams:
    """Parameters of ``f(u) = tau * ||u||_1 - c @ u`` scaled by ``mu``."""

    c: np.ndarray
    mu: float
    tau: float

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if not np.all(np.isfinite(c)):
            raise ValueError("c must be finite")
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        object.__setattr__(self, "c", c)


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def prox_f(x, params):
    """Soft-threshold ``x + mu*c`` at ``mu*tau``.

    This is the minimiser of ``mu*(tau*||u||_1 - c@u) + 0.5*||u - x||**2``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != params.c.shape:
        raise ValueError(f"dimension mismatch: x{x.shape} vs c{params.c.shape}")
    return soft_threshold(x + params.mu * params.c, params.mu * params.tau)


def prox_g(z):
    """Euclidean projection onto the closed unit ball."""
    z = np.asarray(z, dtype=float)
    nrm = np.linalg.norm(z)
    if nrm <= 1.0:
        return z.copy()
    out = z / nrm
    # rounding can leave the norm an ulp above one
    while np.linalg.norm(out) > 1.0:
        out *= 1.0 - 2.0**-52
    return out


def prox_g_augmented(z, n_ball):
    """Project the first ``n_ball`` coordinates onto the unit ball, zero the rest."""
    z = np.asarray(z, dtype=float)
    if n_ball > z.shape[0] or n_ball < 0:
        raise ValueError(f"n_ball={n_ball} exceeds vector length {z.shape[0]}")
    out = np.zeros_like(z)
    out[:n_ball] = prox_g(z[:n_ball])
    while np.linalg.norm(out) > 1.0:
        out *= 1.0 - 2.0**-52
    return out
