"""Covariance families, ground-truth canonical pairs and Gaussian sampling."""

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import linalg

from .core import Dataset

FAMILIES = ("identity", "toeplitz", "sparse_inverse", "spiked", "block_toeplitz")


def toeplitz_cov(p, base):
    """``p x p`` matrix with entries ``base**|i-j|``."""
    if not 0.0 <= base < 1.0:
        raise ValueError("toeplitz base must lie in [0, 1)")
    return linalg.toeplitz(base ** np.arange(p))


def sparse_inverse_precision(p):
    """Banded precision matrix with 1 on the diagonal, 0.5 and 0.4 off it."""
    if p < 3:
        raise ValueError("sparse inverse family needs p >= 3")
    col = np.zeros(p)
    col[0], col[1], col[2] = 1.0, 0.5, 0.4
    return linalg.toeplitz(col)


def sparse_inverse_cov(p):
    """Correlation matrix whose unnormalised inverse is banded."""
    omega = sparse_inverse_precision(p)
    try:
        chol = linalg.cho_factor(omega, lower=True)
    except linalg.LinAlgError:
        raise ValueError(f"banded precision is not positive definite at p={p}") from None
    sigma0 = linalg.cho_solve(chol, np.eye(p))
    sigma0 = 0.5 * (sigma0 + sigma0.T)
    d = np.sqrt(np.diag(sigma0))
    out = sigma0 / np.outer(d, d)
    np.fill_diagonal(out, 1.0)
    return out


def random_orthonormal(p, k, rng):
    Q, R = np.linalg.qr(rng.standard_normal((p, k)))
    # fix column signs so the factorisation is unique
    return Q * np.sign(np.diag(R))


def spiked_cov(p, k, lam, seed):
    """``lam * W W^T + I`` with a seeded random orthonormal ``W`` (p x k)."""
    if k > p:
        raise ValueError("spike rank exceeds dimension")
    W = random_orthonormal(p, k, np.random.default_rng(seed))
    return lam * (W @ W.T) + np.eye(p), W


def block_toeplitz_cov(p, blocks, base):
    if blocks < 1 or p % blocks:
        raise ValueError(f"blocks={blocks} does not divide p={p}")
    return linalg.block_diag(*[toeplitz_cov(p // blocks, base)] * blocks)


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of one simulation scenario.

    ``base`` is the Toeplitz decay (0.9 for ``toeplitz``, 0.7 for
    ``block_toeplitz`` when left as ``None``). ``rho2 > 0`` adds a second
    canonical pair with disjoint support (identity family only).
    """

    family: str = "identity"
    n: int = 400
    p: int = 800
    q: int = 800
    s_u: int = 5
    s_v: int = 5
    rho: float = 0.9
    seed: int = 0
    base: Optional[float] = None
    blocks: int = 5
    spike_k: int = 20
    spike_lam: float = 250.0
    rho2: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if min(self.n, self.p, self.q) < 1:
            raise ValueError("n, p, q must be positive")
        if not (1 <= self.s_u <= self.p and 1 <= self.s_v <= self.q):
            raise ValueError("sparsity must satisfy 1 <= s_u <= p and 1 <= s_v <= q")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if self.family == "block_toeplitz":
            if self.p % self.blocks or self.q % self.blocks:
                raise ValueError(f"blocks={self.blocks} must divide p={self.p} and q={self.q}")
        if self.rho2:
            if self.family != "identity":
                raise ValueError("a second canonical pair is only supported for the identity family")
            if not 0.0 < self.rho2 < self.rho:
                raise ValueError("rho2 must lie in (0, rho)")
            if 2 * self.s_u > self.p or 2 * self.s_v > self.q:
                raise ValueError("disjoint supports need 2*s <= dimension")

    @property
    def toeplitz_base(self):
        if self.base is not None:
            return self.base
        return 0.7 if self.family == "block_toeplitz" else 0.9

    def to_dict(self):
        return asdict(self)


@dataclass
class TruthSpec:
    u_true: np.ndarray
    v_true: np.ndarray
    Sigma_x: np.ndarray
    Sigma_y: np.ndarray
    Sigma_xy: np.ndarray
    rho: float
    family: str = "identity"
    seed: int = 0
    u2_true: Optional[np.ndarray] = None
    v2_true: Optional[np.ndarray] = None
    rho2: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def joint(self):
        return np.block([[self.Sigma_x, self.Sigma_xy], [self.Sigma_xy.T, self.Sigma_y]])

    def to_dict(self):
        d = {
            "family": self.family,
            "seed": int(self.seed),
            "rho": float(self.rho),
            "u_true": [float(x) for x in self.u_true],
            "v_true": [float(x) for x in self.v_true],
        }
        if self.u2_true is not None:
            d["rho2"] = float(self.rho2)
            d["u2_true"] = [float(x) for x in self.u2_true]
            d["v2_true"] = [float(x) for x in self.v2_true]
        return d


def marginal_covs(spec, rng):
    fam, p, q = spec.family, spec.p, spec.q
    if fam == "identity":
        return np.eye(p), np.eye(q)
    if fam == "toeplitz":
        return toeplitz_cov(p, spec.toeplitz_base), toeplitz_cov(q, spec.toeplitz_base)
    if fam == "sparse_inverse":
        return sparse_inverse_cov(p), sparse_inverse_cov(q)
    if fam == "spiked":
        sx, _ = spiked_cov(p, spec.spike_k, spec.spike_lam, int(rng.integers(2**32)))
        sy, _ = spiked_cov(q, spec.spike_k, spec.spike_lam, int(rng.integers(2**32)))
        return sx, sy
    if fam == "block_toeplitz":
        b = spec.toeplitz_base
        return block_toeplitz_cov(p, spec.blocks, b), block_toeplitz_cov(q, spec.blocks, b)
    raise ValueError(fam)


def _sparse_vector(dim, support, values):
    out = np.zeros(dim)
    out[support] = values
    return out


def _normalize(w, S):
    return w / np.sqrt(w @ S @ w)


FIXED_SUPPORT = (0, 5, 10, 15, 20)


def make_truth(spec):
    """Draw sparse canonical vectors and build the rank-1 cross covariance.

    ``Sigma_xy = rho * Sigma_x u v^T Sigma_y`` with ``u^T Sigma_x u = 1`` and
    ``v^T Sigma_y v = 1``, so ``rho`` is the population canonical correlation.
    """
    rng = np.random.default_rng(spec.seed)
    Sx, Sy = marginal_covs(spec, rng)

    if spec.family == "block_toeplitz" and spec.s_u == 5 and spec.s_v == 5:
        u = _sparse_vector(spec.p, list(FIXED_SUPPORT), 1 / np.sqrt(5))
        v = _sparse_vector(spec.q, list(FIXED_SUPPORT), 1 / np.sqrt(5))
        u2 = v2 = None
    else:
        n_u = spec.s_u * (2 if spec.rho2 else 1)
        n_v = spec.s_v * (2 if spec.rho2 else 1)
        sup_u = rng.choice(spec.p, n_u, replace=False)
        sup_v = rng.choice(spec.q, n_v, replace=False)
        sgn_u = rng.choice([-1.0, 1.0], n_u)
        sgn_v = rng.choice([-1.0, 1.0], n_v)
        u = _sparse_vector(spec.p, sup_u[: spec.s_u], sgn_u[: spec.s_u])
        v = _sparse_vector(spec.q, sup_v[: spec.s_v], sgn_v[: spec.s_v])
        if spec.rho2:
            u2 = _sparse_vector(spec.p, sup_u[spec.s_u:], sgn_u[spec.s_u:])
            v2 = _sparse_vector(spec.q, sup_v[spec.s_v:], sgn_v[spec.s_v:])
        else:
            u2 = v2 = None

    u, v = _normalize(u, Sx), _normalize(v, Sy)
    inner = spec.rho * np.outer(u, v)
    if u2 is not None:
        u2, v2 = _normalize(u2, Sx), _normalize(v2, Sy)
        inner = inner + spec.rho2 * np.outer(u2, v2)
    Sxy = Sx @ inner @ Sy

    truth = TruthSpec(
        u_true=u, v_true=v, Sigma_x=Sx, Sigma_y=Sy, Sigma_xy=Sxy, rho=spec.rho,
        family=spec.family, seed=spec.seed, u2_true=u2, v2_true=v2, rho2=spec.rho2,
    )
    joint_cholesky(truth)
    return truth


def joint_cholesky(truth):
    """Lower Cholesky factor of the joint covariance (cached on ``truth``)."""
    L = truth.extras.get("chol")
    if L is None:
        try:
            L = np.linalg.cholesky(truth.joint)
        except np.linalg.LinAlgError:
            raise ValueError("joint covariance is not positive definite") from None
        truth.extras["chol"] = L
    return L


def sample_joint(truth, n, seed):
    """Draw ``n`` rows of ``(x, y) ~ N(0, joint)``; returns raw (uncentered) views."""
    L = joint_cholesky(truth)
    p = truth.Sigma_x.shape[0]
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, L.shape[0])) @ L.T
    return Dataset(Z[:, :p], Z[:, p:])


def replicate_seeds(seed, replicate):
    """Independent (truth, data) seeds for one replicate of a scenario."""
    ss = np.random.SeedSequence([int(seed), int(replicate)])
    a, b = ss.generate_state(2)
    return int(a), int(b)


def special_case_sigma(U, V, Lambda):
    """Joint covariance ``[[I, U L V^T], [V L U^T, I]]`` for orthonormal ``U``, ``V``."""
    U, V = np.atleast_2d(U), np.atleast_2d(V)
    lam = np.diag(Lambda) if np.ndim(Lambda) == 2 else np.asarray(Lambda, dtype=float)
    k = lam.shape[0]
    if U.shape[1] != k or V.shape[1] != k:
        raise ValueError("U, V and Lambda disagree on k")
    if not (np.allclose(U.T @ U, np.eye(k), atol=1e-10) and np.allclose(V.T @ V, np.eye(k), atol=1e-10)):
        raise ValueError("U and V must have orthonormal columns")
    if np.any(lam < 0) or np.any(lam > 1):
        raise ValueError("Lambda entries must lie in [0, 1]")
    p, q = U.shape[0], V.shape[0]
    C = (U * lam) @ V.T
    return np.block([[np.eye(p), C], [C.T, np.eye(q)]])


def special_case_eigvecs(U, V):
    """Closed-form eigenvectors ``(U_i; +-V_i) / sqrt(2)``, plus first, minus second."""
    plus = np.vstack([U, V]) / np.sqrt(2)
    minus = np.vstack([U, -V]) / np.sqrt(2)
    return plus, minus
