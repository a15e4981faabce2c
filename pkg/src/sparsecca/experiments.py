"""Simulation benchmarks with oracle penalty selection, and Pareto sweeps."""

import logging
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .admm import NumericalError
from .baselines import SingularGramError, classical_cca, pma_path
from .core import CcaSolution, Dataset, SolverConfig
from .metrics import loss, pareto_frontier, pareto_point, population_correlation, sample_correlation
from .simulation import ScenarioSpec, make_truth, replicate_seeds, sample_joint
from .solver import solve_path

logger = logging.getLogger(__name__)

METHODS = ("ours", "pma", "classical")


class ConfigError(ValueError):
    pass


def tau_grid(spec):
    """A list of penalties from a list or a ``{start, stop, num}`` geometric spec."""
    if isinstance(spec, dict):
        try:
            return [float(x) for x in np.geomspace(spec["start"], spec["stop"], int(spec["num"]))]
        except KeyError as exc:
            raise ConfigError(f"geometric tau grid needs start, stop, num (missing {exc})") from None
    if isinstance(spec, (int, float)):
        return [float(spec)]
    return [float(x) for x in spec]


DEFAULT_GRID = {"start": 0.6, "stop": 0.015, "num": 15}


@dataclass
class ExperimentConfig:
    scenario: ScenarioSpec
    replicates: int = 10
    sizes: list = None
    tau_grid_u: list = field(default_factory=lambda: tau_grid(DEFAULT_GRID))
    tau_grid_v: list = None
    grid: str = "diagonal"
    alpha: float = 1.0
    tol: float = 1e-6
    max_iter: int = 5000
    lam: float = None
    n_starts: int = 10
    classical_ridge: float = 0.0
    methods: list = field(default_factory=lambda: ["ours"])
    n_jobs: int = 1

    def __post_init__(self):
        if self.tau_grid_v is None:
            self.tau_grid_v = list(self.tau_grid_u)
        if self.sizes is None:
            self.sizes = [[self.scenario.n, self.scenario.p, self.scenario.q]]
        self.sizes = [[int(a) for a in s] for s in self.sizes]
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1 (an empty table cannot be built)")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigError(f"methods must be a nonempty subset of {METHODS}, got {self.methods}")
        if self.grid not in ("diagonal", "product"):
            raise ConfigError("grid must be 'diagonal' or 'product'")
        if self.grid == "diagonal" and len(self.tau_grid_u) != len(self.tau_grid_v):
            raise ConfigError("a diagonal grid needs tau_grid_u and tau_grid_v of equal length")
        if not self.tau_grid_u:
            raise ConfigError("tau grid is empty")

    def tau_pairs(self):
        if self.grid == "diagonal":
            return list(zip(self.tau_grid_u, self.tau_grid_v))
        return [(a, b) for a in self.tau_grid_u for b in self.tau_grid_v]

    def solver_config(self):
        return SolverConfig(alpha_x=self.alpha, alpha_y=self.alpha, inner_tol=self.tol,
                            inner_max_iter=self.max_iter, lam=self.lam,
                            n_starts=self.n_starts)

    def to_dict(self):
        d = asdict(self)
        d["scenario"] = self.scenario.to_dict()
        return d

    @classmethod
    def from_dict(cls, d):
        """Build from the nested ``scenario`` / ``solver`` / ``methods`` layout."""
        if not isinstance(d, dict) or "scenario" not in d:
            raise ConfigError("config must be a mapping with a 'scenario' section")
        scen = dict(d["scenario"])
        replicates = int(scen.pop("replicates", 10))
        sizes = scen.pop("sizes", None)
        known = {f.name for f in fields(ScenarioSpec)}
        unknown = set(scen) - known
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        try:
            scenario = ScenarioSpec(**scen)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        solver = dict(d.get("solver") or {})
        kw = {}
        for key in ("grid", "alpha", "tol", "max_iter", "lam", "n_starts", "classical_ridge", "n_jobs"):
            if key in solver:
                kw[key] = solver.pop(key)
        if "tau_grid_u" in solver:
            kw["tau_grid_u"] = tau_grid(solver.pop("tau_grid_u"))
        if "tau_grid_v" in solver:
            kw["tau_grid_v"] = tau_grid(solver.pop("tau_grid_v"))
        if solver:
            raise ConfigError(f"unknown solver keys: {sorted(solver)}")
        methods = d.get("methods", ["ours"])
        return cls(scenario=scenario, replicates=replicates, sizes=sizes, methods=list(methods), **kw)


def scenario_for(exp, size):
    n, p, q = size
    return ScenarioSpec(**{**exp.scenario.to_dict(), "n": n, "p": p, "q": q})


def simulate_replicate(spec, replicate):
    """Truth and centred/scaled data of one replicate."""
    truth_seed, data_seed = replicate_seeds(spec.seed, replicate)
    truth = make_truth(ScenarioSpec(**{**spec.to_dict(), "seed": truth_seed}))
    raw = sample_joint(truth, spec.n, data_seed)
    return truth, Dataset.from_raw(raw.X, raw.Y)


def common_unit(data, u, v):
    """Rescale so ``||X u|| = ||Y v|| = 1`` (the shared unit for comparisons)."""
    nu, nv = np.linalg.norm(data.X @ u), np.linalg.norm(data.Y @ v)
    return (u / nu if nu > 0 else u), (v / nv if nv > 0 else v)


def _record(method, replicate, size, tau_u, tau_v, sol, truth, data):
    n, p, q = size
    rec = {
        "method": method, "replicate": replicate, "n": n, "p": p, "q": q,
        "tau_u": tau_u, "tau_v": tau_v, "rho_hat": math.nan, "e_u": math.nan,
        "e_v": math.nan, "pop_corr": math.nan, "l1_u": math.nan, "l1_v": math.nan,
        "nnz_u": 0, "nnz_v": 0, "zero": True, "converged": False, "error": "",
    }
    if isinstance(sol, str):
        rec["error"] = sol
        return rec
    rec["converged"] = bool(sol.converged)
    if sol.zero_solution or not np.any(sol.u_hat) or not np.any(sol.v_hat):
        return rec
    u, v = common_unit(data, sol.u_hat, sol.v_hat)
    rec.update(
        zero=False,
        rho_hat=sample_correlation(data.X, data.Y, u, v),
        e_u=loss(u, truth.u_true),
        e_v=loss(v, truth.v_true),
        pop_corr=population_correlation(truth, u, v),
        l1_u=float(np.abs(u).sum()),
        l1_v=float(np.abs(v).sum()),
        nnz_u=int(np.count_nonzero(u)),
        nnz_v=int(np.count_nonzero(v)),
    )
    return rec


def run_method(method, data, taus, cfg, ridge=0.0):
    """Solutions of one method over the penalty grid (classical ignores it)."""
    if method == "ours":
        return solve_path(data, taus, cfg)
    if method == "pma":
        return pma_path(data.X, data.Y, taus)
    if method == "classical":
        u, v, rho = classical_cca(data.X, data.Y, 1, ridge)[0]
        return [CcaSolution(u_hat=u, v_hat=v, sample_corr=rho, l1_u=float(np.abs(u).sum()),
                            l1_v=float(np.abs(v).sum()), converged=True, outer_iters=1)]
    raise ValueError(method)


def run_replicate(exp, size, replicate):
    spec = scenario_for(exp, size)
    truth, data = simulate_replicate(spec, replicate)
    cfg = exp.solver_config()
    taus = exp.tau_pairs()
    records = []
    for method in exp.methods:
        grid = [(math.nan, math.nan)] if method == "classical" else taus
        try:
            sols = run_method(method, data, taus, cfg, exp.classical_ridge)
        except (NumericalError, SingularGramError, np.linalg.LinAlgError, ValueError) as exc:
            logger.warning("%s failed on replicate %d: %s", method, replicate, exc)
            sols = [f"{type(exc).__name__}: {exc}"] * len(grid)
        for (tu, tv), sol in zip(grid, sols):
            records.append(_record(method, replicate, size, tu, tv, sol, truth, data))
    return records


def select_oracle(records):
    """Per (method, size, replicate), the record minimising ``e_u + e_v``.

    Ties break towards the earlier grid position. Groups without a valid
    record yield their first (failed) record.
    """
    groups = {}
    for rec in records:
        key = (rec["method"], rec["n"], rec["p"], rec["q"], rec["replicate"])
        groups.setdefault(key, []).append(rec)
    best = []
    for key in sorted(groups):
        recs = groups[key]
        valid = [r for r in recs if not r["zero"] and not r["error"]]
        if valid:
            best.append(min(valid, key=lambda r: r["e_u"] + r["e_v"]))
        else:
            best.append(recs[0])
    return best


def summarize(best):
    """Mean ``(rho_hat, e_u, e_v)`` per method and size over valid replicates."""
    groups = {}
    for rec in best:
        groups.setdefault((rec["method"], rec["n"], rec["p"], rec["q"]), []).append(rec)
    rows = []
    for (method, n, p, q) in sorted(groups, key=lambda k: (k[1], k[2], k[3], METHODS.index(k[0]))):
        recs = groups[(method, n, p, q)]
        ok = [r for r in recs if not r["zero"] and not r["error"]]
        row = {"method": method, "n": n, "p": p, "q": q, "replicates": len(recs),
               "failed": len(recs) - len(ok)}
        for k in ("rho_hat", "e_u", "e_v"):
            row[k] = float(np.mean([r[k] for r in ok])) if ok else math.nan
        rows.append(row)
    return rows


def benchmark(exp):
    """Run every size, replicate and method; returns ``(records, best, summary)``."""
    jobs = [(size, r) for size in exp.sizes for r in range(exp.replicates)]
    if exp.n_jobs == 1:
        chunks = [run_replicate(exp, size, r) for size, r in jobs]
    else:
        from joblib import Parallel, delayed

        chunks = Parallel(n_jobs=exp.n_jobs)(delayed(run_replicate)(exp, s, r) for s, r in jobs)
    records = [rec for chunk in chunks for rec in chunk]
    records.sort(key=lambda r: (r["n"], r["p"], r["q"], METHODS.index(r["method"]), r["replicate"]))
    best = select_oracle(records)
    return records, best, summarize(best)


def format_table(summary):
    """Human readable ``(rho_hat, e_u, e_v)`` table, one row per size."""
    methods = [m for m in METHODS if any(r["method"] == m for r in summary)]
    by_size = {}
    for r in summary:
        by_size.setdefault((r["n"], r["p"], r["q"]), {})[r["method"]] = r
    header = ["(n, p, q)"] + methods
    lines = []
    for size in sorted(by_size):
        cells = [f"({size[0]}, {size[1]}, {size[2]})"]
        for m in methods:
            r = by_size[size].get(m)
            if r is None:
                cells.append("-")
            elif math.isnan(r["rho_hat"]):
                cells.append("failed")
            else:
                mark = f" [{r['failed']} failed]" if r["failed"] else ""
                cells.append(f"({r['rho_hat']:.2f}, {r['e_u']:.3f}, {r['e_v']:.3f}){mark}")
        lines.append(cells)
    widths = [max(len(row[i]) for row in [header] + lines) for i in range(len(header))]
    fmt = lambda row: " | ".join(c.ljust(w) for c, w in zip(row, widths))
    out = [fmt(header), "-+-".join("-" * w for w in widths)] + [fmt(r) for r in lines]
    return "\n".join(out) + "\n"


def pareto_sweep(data, taus, method="ours", truth=None, cfg=None):
    """Pareto coordinates for each penalty pair.

    Each point carries ``tau_u``, ``tau_v``, ``l1_sum``, ``sample_corr`` and
    (with ``truth``) ``population_corr``; weights are first put in the common
    unit ``||X u|| = ||Y v|| = 1``. Failed points are flagged, not dropped.
    """
    cfg = cfg or SolverConfig()
    try:
        sols = run_method(method, data, taus, cfg)
    except (NumericalError, ValueError) as exc:
        sols = [f"{type(exc).__name__}: {exc}"] * len(taus)
    points = []
    for (tu, tv), sol in zip(taus, sols):
        pt = {"method": method, "tau_u": float(tu), "tau_v": float(tv)}
        if isinstance(sol, str):
            pt.update(l1_sum=math.nan, sample_corr=math.nan, valid=False, error=sol)
            if truth is not None:
                pt["population_corr"] = math.nan
        elif sol.zero_solution:
            pt.update(l1_sum=0.0, sample_corr=math.nan, valid=False, error="zero solution")
            if truth is not None:
                pt["population_corr"] = math.nan
        else:
            u, v = common_unit(data, sol.u_hat, sol.v_hat)
            unit = CcaSolution(u_hat=u, v_hat=v, sample_corr=sol.sample_corr, l1_u=0, l1_v=0,
                               converged=sol.converged, outer_iters=sol.outer_iters)
            pt.update(pareto_point(unit, data.X, data.Y, truth), error="")
        points.append(pt)
    return points


def frontier_of(points, axis="population_corr"):
    """``(corr, l1)`` array of the nondominated valid points."""
    P = np.array([[pt[axis], pt["l1_sum"]] for pt in points if pt["valid"]], dtype=float)
    if len(P) == 0:
        return P.reshape(0, 2)
    return P[pareto_frontier(P)]
