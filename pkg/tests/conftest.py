import math
from pathlib import Path

import pytest

from virtualgap import dataset, models, procedure

DATA_DIR = Path(__file__).resolve().parent.parent / "datasets"

# Six-unit benchmark set used throughout (two inputs, two outputs).
EXAMPLE6_CSV = (DATA_DIR / "example6.csv").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def example6():
    return dataset.parse(EXAMPLE6_CSV, "csv")


@pytest.fixture(scope="session")
def proc_k(example6):
    """Phases 1-3 for the inefficient unit K."""
    return procedure.run_phases(example6, "K")


@pytest.fixture(scope="session")
def proc_b(example6):
    return procedure.run_phases(example6, "B", procedure.SUPER)


@pytest.fixture(scope="session")
def proc_d(example6):
    return procedure.run_phases(example6, "D", procedure.SUPER)


def endpoint_solution(state):
    """The model solution at the chosen second scalar."""
    for e in state.phase3_endpoints:
        if e.status == "ok" and abs(e.kappa - state.kappa2) <= 1e-9:
            return e.solution
    raise AssertionError("no usable phase-3 endpoint")


def random_matrix(rng, n=None, m=None, s=None, low=0.5, high=50.0):
    n = n if n is not None else int(rng.integers(4, 13))
    m = m if m is not None else int(rng.integers(1, 4))
    s = s if s is not None else int(rng.integers(1, 4))
    return dataset.DecisionMatrix(
        tuple(f"u{i}" for i in range(n)),
        tuple((f"x{i}", "") for i in range(m)),
        tuple((f"y{r}", "") for r in range(s)),
        rng.uniform(low, high, (m, n)),
        rng.uniform(low, high, (s, n)),
    )


def first_inefficient(matrix):
    """First unit with a positive normalized adjustment price, with its run."""
    for dmu in matrix.dmus:
        sol = models.evaluate(matrix, "pt", dmu, verify_step2=False)
        if sol.step2.adjustment_price > models.EFFICIENT_TOL:
            return dmu, sol
    return None, None


def usable_super_subject(matrix, plain_sol, cap=100.0):
    """An efficient peer whose super-efficiency run supports re-evaluation.

    Units with unbounded super-efficiency have degenerate benchmarks (an
    adjusted column would not be strictly positive) and are skipped.
    """
    for peer in plain_sol.step2.reference:
        sp = models.evaluate(matrix, "spt", peer, check_efficient=False, verify_step2=False)
        if math.isfinite(sp.efficiency) and sp.efficiency < cap and models.first_scalar(sp) > 1e-6:
            return peer, sp
    return None, None


def assert_close(actual, expected, tol, label=""):
    assert abs(actual - expected) <= tol, (
        f"{label}: {actual!r} differs from {expected!r} by more than {tol}"
    )
