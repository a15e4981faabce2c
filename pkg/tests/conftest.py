import numpy as np
import pytest

from sparsecca.core import Dataset

CRITERIA = {
    1: "prox correctness",
    2: "inner-solver oracle equivalence",
    3: "outer-loop monotonicity",
    4: "special-case spectrum",
    5: "identity table",
    6: "Toeplitz table and PMA gap",
    7: "sparse-inverse table",
    8: "spiked support recovery and classical failure",
    9: "Pareto dominance",
    10: "deflation",
    11: "error decay with sample size",
    12: "CLI bit-reproducibility",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): test belongs to acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes.setdefault(marker.args[0], []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(CRITERIA):
        if crit not in _outcomes:
            continue
        ok = all(o == "passed" for o in _outcomes[crit])
        terminalreporter.write_line(f"criterion {crit:2d} ({CRITERIA[crit]}): {'PASS' if ok else 'FAIL'}")


def scaled(X, Y):
    """Centred views divided by sqrt(n)."""
    return Dataset.from_raw(X, Y)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
