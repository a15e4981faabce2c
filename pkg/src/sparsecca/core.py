"""Shared data containers, CSV ingestion and centering conventions."""

import csv
import enum
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np


class ScaleMode(str, enum.Enum):
    RAW = "raw"
    UNIT_VARIANCE = "unit-variance"


class DataError(ValueError):
    """Raised for malformed input matrices or files."""


def load_csv(path, has_header=False):
    """Read a dense real matrix from a comma separated file.

    Rows are returned in reading order. Ragged rows, non-numeric or
    non-finite cells raise :class:`DataError` naming the offending row and
    column (1-based, counting the header line if present).
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    start = 1 if has_header else 0
    body = [(i + 1, r) for i, r in enumerate(rows) if i >= start and r]
    if not body:
        raise DataError(f"{path}: no data rows")

    width = len(body[0][1])
    out = np.empty((len(body), width))
    for k, (lineno, row) in enumerate(body):
        if len(row) != width:
            raise DataError(
                f"{path}: ragged row {lineno}: expected {width} columns, got {len(row)}"
            )
        for j, cell in enumerate(row):
            try:
                val = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric cell at row {lineno}, column {j + 1}: {cell!r}"
                ) from None
            if not np.isfinite(val):
                raise DataError(
                    f"{path}: non-finite cell at row {lineno}, column {j + 1}: {cell!r}"
                )
            out[k, j] = val
    return out


def save_csv(path, M):
    """Write a matrix row-major with round-trip precision."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    np.savetxt(path, M, delimiter=",", fmt="%.17g")


def center_scale(X, mode=ScaleMode.RAW):
    """Center the columns of ``X``; optionally divide by ``sqrt(n)``.

    With ``mode="unit-variance"`` the result ``Z`` satisfies
    ``||Z u||**2 == var(X u)`` (the 1/n sample variance) for every ``u``.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DataError(f"expected a 2-d matrix, got shape {X.shape}")
    n = X.shape[0]
    if n < 2:
        raise DataError("need at least two rows to center")
    Xc = X - X.mean(axis=0)
    if ScaleMode(mode) is ScaleMode.UNIT_VARIANCE:
        Xc /= np.sqrt(n)
    return Xc


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """A pair of views sharing the same ``n`` rows."""

    X: np.ndarray
    Y: np.ndarray
    centered: bool = False
    scale_mode: ScaleMode = ScaleMode.RAW

    def __post_init__(self):
        X, Y = _frozen(self.X), _frozen(self.Y)
        if X.ndim != 2 or Y.ndim != 2:
            raise DataError("X and Y must be 2-d")
        if X.shape[0] != Y.shape[0]:
            raise DataError(
                f"X and Y must have the same number of rows ({X.shape[0]} != {Y.shape[0]})"
            )
        if X.shape[0] < 2 or X.shape[1] < 1 or Y.shape[1] < 1:
            raise DataError(f"degenerate shapes X{X.shape}, Y{Y.shape}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise DataError("X and Y must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "scale_mode", ScaleMode(self.scale_mode))
        if self.centered:
            for name, M in (("X", X), ("Y", Y)):
                tol = 1e-10 * np.maximum(np.abs(M).max(axis=0), 1.0)
                if np.any(np.abs(M.mean(axis=0)) > tol):
                    raise DataError(f"{name} is flagged centered but has nonzero column means")

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def p(self):
        return self.X.shape[1]

    @property
    def q(self):
        return self.Y.shape[1]

    @classmethod
    def from_raw(cls, X, Y, mode=ScaleMode.UNIT_VARIANCE):
        """Center (and by default scale) both views."""
        return cls(center_scale(X, mode), center_scale(Y, mode), centered=True, scale_mode=mode)


@dataclass(frozen=True)
class SolverConfig:
    """Regularisation, step-size and stopping parameters.

    ``lam`` is the ADMM parameter (the inverse of the augmented-Lagrangian
    penalty); ``None`` picks ``2 * ||A||`` per subproblem. When ``auto_step``
    is set, ``mu`` is ignored and derived per subproblem as
    ``lam / (1.05 * ||A||)**2``. ``n_starts`` extra starts (at the largest
    cross-covariance entries) are screened alongside the automatic start;
    zero disables the screening.
    """

    tau_u: float = 0.0
    tau_v: float = 0.0
    mu: float = 1.0
    lam: Optional[float] = None
    alpha_x: float = 1.0
    alpha_y: float = 1.0
    inner_tol: float = 1e-6
    outer_tol: float = 1e-5
    inner_max_iter: int = 5000
    outer_max_iter: int = 100
    auto_step: bool = True
    seed: int = 0
    n_starts: int = 10

    def __post_init__(self):
        if self.tau_u < 0 or self.tau_v < 0:
            raise ValueError("tau_u and tau_v must be nonnegative")
        if self.mu <= 0 or (self.lam is not None and self.lam <= 0):
            raise ValueError("mu and lam must be positive")
        for a in (self.alpha_x, self.alpha_y):
            if not 0.0 <= a <= 1.0:
                raise ValueError("bridge weights must lie in [0, 1]")
        if self.inner_tol <= 0 or self.outer_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.inner_max_iter < 1 or self.outer_max_iter < 1:
            raise ValueError("iteration caps must be positive")
        if self.n_starts < 0:
            raise ValueError("n_starts must be nonnegative")

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass
class AdmmState:
    """Iterate ``(u, z, xi)`` of the inner solver; ``xi`` is the scaled dual."""

    u: np.ndarray
    z: np.ndarray
    xi: np.ndarray
    iter: int = 0
    primal_residual: float = np.inf
    dual_residual: float = np.inf
    primal_history: list = field(default_factory=list)
    dual_history: list = field(default_factory=list)

    def __post_init__(self):
        if self.z.shape != self.xi.shape:
            raise ValueError("z and xi must have the same length")


@dataclass
class CcaSolution:
    """One estimated canonical pair plus convergence diagnostics."""

    u_hat: np.ndarray
    v_hat: np.ndarray
    sample_corr: float
    l1_u: float
    l1_v: float
    converged: bool
    outer_iters: int
    objective_history: list = field(default_factory=list)
    zero_solution: bool = False
    primal_residual_u: float = 0.0
    primal_residual_v: float = 0.0
    inner_iters: int = 0

    def to_dict(self):
        return {
            "u_hat": [float(x) for x in self.u_hat],
            "v_hat": [float(x) for x in self.v_hat],
            "sample_corr": _maybe_float(self.sample_corr),
            "l1_u": float(self.l1_u),
            "l1_v": float(self.l1_v),
            "converged": bool(self.converged),
            "zero_solution": bool(self.zero_solution),
            "outer_iters": int(self.outer_iters),
            "inner_iters": int(self.inner_iters),
            "primal_residual_u": float(self.primal_residual_u),
            "primal_residual_v": float(self.primal_residual_v),
            "objective_history": [float(x) for x in self.objective_history],
        }


def _maybe_float(x):
    x = float(x)
    return x if np.isfinite(x) else None
