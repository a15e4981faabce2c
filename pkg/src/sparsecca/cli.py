"""Command-line driver: simulate, solve, benchmark and pareto."""

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .admm import NumericalError
from .core import DataError, Dataset, SolverConfig, load_csv, save_csv
from .experiments import (ConfigError, ExperimentConfig, benchmark, format_table, frontier_of,
                          pareto_sweep, tau_grid)
from .metrics import true_point
from .simulation import ScenarioSpec, make_truth, replicate_seeds, sample_joint
from .solver import DeflationContext, orthogonality_residuals, solve_first_pair, solve_rth_pair

logger = logging.getLogger("sparsecca")

EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def write_json(path, obj):
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_records(path, records, columns=None):
    columns = columns or list(records[0])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for rec in records:
            w.writerow([_cell(rec.get(c, "")) for c in columns])


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x)) if math.isfinite(x) else "nan"
    return x


def read_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = yaml.safe_load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise UsageError(f"cannot parse config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path} must be a mapping")
    return cfg


# simulate ------------------------------------------------------------------

def scenario_from_config(cfg):
    scen = dict(cfg.get("scenario") or {})
    replicates = int(scen.pop("replicates", 1))
    scen.pop("sizes", None)
    try:
        return ScenarioSpec(**scen), replicates
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid scenario: {exc}") from None


def cmd_simulate(args):
    spec, replicates = scenario_from_config(read_config(args.config))
    if replicates < 1:
        raise UsageError("replicates must be >= 1")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for r in range(replicates):
        truth_seed, data_seed = replicate_seeds(spec.seed, r)
        truth_spec = ScenarioSpec(**{**spec.to_dict(), "seed": truth_seed})
        try:
            truth = make_truth(truth_spec)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        data = sample_joint(truth, spec.n, data_seed)
        rep = out / f"rep_{r:03d}"
        rep.mkdir(exist_ok=True)
        save_csv(rep / "X.csv", data.X)
        save_csv(rep / "Y.csv", data.Y)
        doc = truth.to_dict()
        doc.update(replicate=r, data_seed=data_seed, scenario=truth_spec.to_dict(),
                   config=spec.to_dict(), version=__version__)
        write_json(rep / "truth.json", doc)
    print(f"wrote {replicates} replicate(s) to {out}")
    return 0


def load_truth(path):
    """Rebuild the population model from a ``truth.json`` written by ``simulate``."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        return make_truth(ScenarioSpec(**doc["scenario"]))
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot load truth from {path}: {exc}") from None


# solve ---------------------------------------------------------------------

def load_views(args):
    try:
        X = load_csv(args.x, args.has_header)
        Y = load_csv(args.y, args.has_header)
    except DataError as exc:
        raise UsageError(str(exc)) from None
    if X.shape[0] != Y.shape[0]:
        raise UsageError(f"dimension mismatch: X has {X.shape[0]} rows, Y has {Y.shape[0]}")
    if X.shape[0] < 2:
        raise UsageError("need at least two rows")
    return Dataset.from_raw(X, Y)


def _alphas(args):
    ax = args.alpha if args.alpha_x is None else args.alpha_x
    ay = args.alpha if args.alpha_y is None else args.alpha_y
    return ax, ay


def solver_config(args, tau_u=0.0, tau_v=0.0):
    ax, ay = _alphas(args)
    try:
        return SolverConfig(tau_u=tau_u, tau_v=tau_v, alpha_x=ax, alpha_y=ay, lam=args.lam,
                            inner_tol=args.tol, inner_max_iter=args.max_iter,
                            outer_tol=args.outer_tol, outer_max_iter=args.outer_max_iter,
                            seed=args.seed, n_starts=args.n_starts)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _init(args, data):
    if args.init != "file":
        if args.init_file:
            raise UsageError("--init-file requires --init file")
        return args.init
    if not args.init_file:
        raise UsageError("--init file requires --init-file")
    try:
        doc = json.loads(Path(args.init_file).read_text(encoding="utf-8"))
        u0, v0 = np.asarray(doc["u0"], dtype=float), np.asarray(doc["v0"], dtype=float)
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read init file: {exc}") from None
    if u0.shape != (data.p,) or v0.shape != (data.q,):
        raise UsageError(f"init vectors must have lengths {data.p} and {data.q}")
    return u0, v0


def cmd_solve(args):
    if args.rank < 1:
        raise UsageError("--rank must be >= 1")
    data = load_views(args)
    cfg = solver_config(args, args.tau_u, args.tau_v)
    init = _init(args, data)
    pairs, sols = [], []
    sol = solve_first_pair(data, cfg, init=init)
    sols.append(sol)
    pairs.append({"index": 1, **sol.to_dict()})
    for k in range(2, args.rank + 1):
        ctx = DeflationContext(np.column_stack([s.u_hat for s in sols]),
                               np.column_stack([s.v_hat for s in sols]))
        sol = solve_rth_pair(data, ctx, cfg, init="zeros" if args.init == "zeros" else "auto")
        ru, rv = orthogonality_residuals(data, ctx, sol.u_hat, sol.v_hat, cfg)
        sols.append(sol)
        pairs.append({"index": k, **sol.to_dict(),
                      "orthogonality_u": ru, "orthogonality_v": rv,
                      "orthogonality_max": float(max(ru.max(), rv.max()))})
    doc = {
        "version": __version__,
        "n": data.n, "p": data.p, "q": data.q,
        "config": {**vars(cfg), "rank": args.rank, "init": args.init,
                   "x": str(args.x), "y": str(args.y), "has_header": args.has_header},
        "scaling": "columns centred and divided by sqrt(n); weights apply to the scaled views",
        "pairs": pairs,
        "zero_solution": any(s.zero_solution for s in sols),
    }
    write_json(args.out, doc)
    for s in pairs:
        state = "zero solution" if s["zero_solution"] else f"corr {s['sample_corr']:.4f}"
        print(f"pair {s['index']}: {state}, outer iterations {s['outer_iters']}")
    return 0


# benchmark -----------------------------------------------------------------

RECORD_COLUMNS = ["method", "n", "p", "q", "replicate", "tau_u", "tau_v", "rho_hat", "e_u",
                  "e_v", "pop_corr", "l1_u", "l1_v", "nnz_u", "nnz_v", "zero", "converged", "error"]
TABLE_COLUMNS = ["method", "n", "p", "q", "replicates", "failed", "rho_hat", "e_u", "e_v"]


def cmd_benchmark(args):
    cfg = read_config(args.config)
    if args.replicates is not None:
        cfg["scenario"] = {**(cfg.get("scenario") or {}), "replicates": args.replicates}
    try:
        exp = ExperimentConfig.from_dict(cfg)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    if args.n_jobs is not None:
        exp.n_jobs = args.n_jobs
    records, best, summary = benchmark(exp)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_records(out / "records.csv", records, RECORD_COLUMNS)
    write_records(out / "best.csv", best, RECORD_COLUMNS)
    write_records(out / "table.csv", summary, TABLE_COLUMNS)
    table = format_table(summary)
    (out / "table.txt").write_text(table, encoding="utf-8")
    write_json(out / "benchmark.json", {"version": __version__, "config": exp.to_dict(),
                                         "summary": summary})
    print(table, end="")
    return 0


# pareto --------------------------------------------------------------------

PARETO_COLUMNS = ["kind", "method", "tau_u", "tau_v", "l1_sum", "sample_corr", "population_corr",
                  "valid", "frontier_sample", "frontier_population", "error"]


def _grid(args):
    if args.grid:
        try:
            spec = yaml.safe_load(Path(args.grid).read_text(encoding="utf-8"))
        except (OSError, yaml.YAMLError) as exc:
            raise UsageError(f"cannot read grid {args.grid}: {exc}") from None
        spec = spec.get("solver", spec) if isinstance(spec, dict) else spec
        try:
            gu = tau_grid(spec["tau_grid_u"])
            gv = tau_grid(spec.get("tau_grid_v", spec["tau_grid_u"]))
            mode = spec.get("grid", "product")
        except (KeyError, TypeError, ConfigError) as exc:
            raise UsageError(f"invalid grid spec: {exc}") from None
    else:
        gu = tau_grid({"start": args.tau_start, "stop": args.tau_stop, "num": args.tau_num})
        gv, mode = gu, args.grid_mode
    if not gu or not gv:
        raise UsageError("tau grid is empty")
    if mode == "diagonal":
        if len(gu) != len(gv):
            raise UsageError("a diagonal grid needs equal-length u and v grids")
        return list(zip(gu, gv))
    return [(a, b) for a in gu for b in gv]


def _mark_frontier(points, axis, flag):
    idx = [i for i, pt in enumerate(points) if pt["valid"] and pt.get(axis) is not None
           and math.isfinite(pt[axis])]
    for pt in points:
        pt[flag] = False
    if not idx:
        return
    from .metrics import pareto_frontier

    P = np.array([[points[i][axis], points[i]["l1_sum"]] for i in idx])
    for j in pareto_frontier(P):
        points[idx[j]][flag] = True


def cmd_pareto(args):
    data = load_views(args)
    truth = load_truth(args.truth) if args.truth else None
    taus = _grid(args)
    cfg = solver_config(args)
    points = pareto_sweep(data, taus, method=args.method, truth=truth, cfg=cfg)
    for pt in points:
        pt["kind"] = "grid"
    _mark_frontier(points, "sample_corr", "frontier_sample")
    if truth is not None:
        _mark_frontier(points, "population_corr", "frontier_population")
        red = true_point(truth, data.X, data.Y)
        points.append({"kind": "truth", "method": "truth", "tau_u": math.nan, "tau_v": math.nan,
                       "valid": True, "error": "", "frontier_sample": False,
                       "frontier_population": False, **red})
    write_records(args.out, points, PARETO_COLUMNS)
    n_front = len(frontier_of([p for p in points if p["kind"] == "grid"], "sample_corr"))
    print(f"wrote {len(points)} points ({n_front} on the sample frontier) to {args.out}")
    return 0


# parser --------------------------------------------------------------------

def _solver_flags(p):
    p.add_argument("--alpha", type=float, default=1.0, help="bridge weight for both views")
    p.add_argument("--alpha-x", type=float, default=None)
    p.add_argument("--alpha-y", type=float, default=None)
    p.add_argument("--lam", type=float, default=None, help="ADMM parameter (default: auto)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6, help="inner ADMM tolerance")
    p.add_argument("--max-iter", type=int, default=5000, help="inner ADMM iteration cap")
    p.add_argument("--outer-tol", type=float, default=1e-5)
    p.add_argument("--outer-max-iter", type=int, default=100)
    p.add_argument("--n-starts", type=int, default=10,
                   help="extra screened starts for the automatic initialisation")


def _view_flags(p):
    p.add_argument("--x", required=True, help="CSV of the first view (rows are samples)")
    p.add_argument("--y", required=True, help="CSV of the second view")
    p.add_argument("--has-header", action="store_true")


def build_parser():
    parser = _Parser(prog="sparsecca", description="Sparse CCA by linearized ADMM.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="draw replicate data sets from a scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("solve", help="estimate canonical pairs")
    _view_flags(p)
    p.add_argument("--tau-u", type=float, default=0.1)
    p.add_argument("--tau-v", type=float, default=0.1)
    p.add_argument("--rank", type=int, default=1, help="number of pairs (deflation depth)")
    p.add_argument("--init", choices=["auto", "zeros", "file"], default="auto")
    p.add_argument("--init-file", default=None, help='JSON with "u0" and "v0"')
    _solver_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("benchmark", help="oracle-penalty simulation table")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--replicates", type=int, default=None, help="override the config")
    p.add_argument("--n-jobs", type=int, default=None)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("pareto", help="correlation against l1 norm over a penalty grid")
    _view_flags(p)
    p.add_argument("--truth", default=None, help="truth.json written by simulate")
    p.add_argument("--method", choices=["ours", "pma"], default="ours")
    p.add_argument("--grid", default=None, help="YAML with tau_grid_u / tau_grid_v")
    p.add_argument("--tau-start", type=float, default=0.6)
    p.add_argument("--tau-stop", type=float, default=0.015)
    p.add_argument("--tau-num", type=int, default=15)
    p.add_argument("--grid-mode", choices=["diagonal", "product"], default="diagonal")
    _solver_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pareto)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sparsecca {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        payload = {"error": type(exc).__name__, "message": str(exc),
                   "iteration": getattr(exc, "iteration", None), "command": args.command}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
