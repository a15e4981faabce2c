"""Sparse canonical correlation analysis by linearized ADMM."""

__version__ = "0.1.0"

from .admm import LinearOperator, NumericalError, kkt_residual, solve_subproblem
from .baselines import PMACCA, ClassicalCCA, SingularGramError, classical_cca, pma_cca
from .core import CcaSolution, DataError, Dataset, ScaleMode, SolverConfig, load_csv, save_csv
from .estimator import SparseCCA
from .metrics import loss, population_correlation, sample_correlation, support_f1
from .prox import prox_f, prox_g, soft_threshold
from .simulation import ScenarioSpec, TruthSpec, make_truth, sample_joint
from .solver import DeflationContext, solve_first_pair, solve_path, solve_rth_pair

__all__ = [
    "CcaSolution", "ClassicalCCA", "DataError", "Dataset", "DeflationContext", "LinearOperator",
    "NumericalError", "PMACCA", "ScaleMode", "ScenarioSpec", "SingularGramError", "SolverConfig",
    "SparseCCA", "TruthSpec", "classical_cca", "kkt_residual", "load_csv", "loss", "make_truth",
    "pma_cca", "population_correlation", "prox_f", "prox_g", "sample_correlation", "sample_joint",
    "save_csv", "soft_threshold", "solve_first_pair", "solve_path", "solve_rth_pair",
    "solve_subproblem", "support_f1",
]
