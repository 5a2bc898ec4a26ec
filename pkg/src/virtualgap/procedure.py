"""The four-phase scalar-selection procedure, ranking and sessions.

Phase 1 classifies the focus unit with the plain model and records the sum
of reference intensities (the first scalar).  Phase 2 re-runs the scalar
family at that value.  Phase 3 ranges the intensity-sum row of the phase-2
program to find the second scalar and evaluates the model at the ranging
endpoints.  Phase 4 is interactive: the decision maker tries candidate
scalars inside the bracket and commits a final one, freezing the
benchmarks.  The engine only evaluates and records; choosing the final
scalar is deliberately left to a human.

A :class:`ProcedureState` is serializable to a versioned JSON document so a
phase-4 exploration can span multiple sittings.
"""

from __future__ import annotations

import datetime
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import analysis, models as M
from .dataset import DecisionMatrix

SCHEMA_VERSION = 1

INEFFICIENCY = "inefficiency"
SUPER = "super-efficiency"
_SCENARIOS = (INEFFICIENCY, SUPER)

_KAPPA_EQ_TOL = 1e-9


class ProcedureError(Exception):
    pass


class PhaseOrderError(ProcedureError):
    """A phase was invoked before its predecessor completed."""


class OutOfIntervalError(ProcedureError):
    """A trial scalar lies outside the phase-3 bracket (pass override=True to force)."""


class UntriedScalarError(ProcedureError):
    """Commit requested for a scalar that was never tried."""


class NotBracketedError(ProcedureError):
    """The target score is not bracketed by the scalar interval."""


@dataclass
class EndpointRecord:
    kappa: float
    side: str                   # "decrease" or "increase"
    status: str                 # "ok", "infeasible", "degenerate", "infinite"
    report: analysis.EfficiencyReport | None = None
    solution: M.ModelSolution | None = None

    def to_json_dict(self) -> dict:
        return {
            "kappa": float(self.kappa) if math.isfinite(self.kappa) else None,
            "side": self.side,
            "status": self.status,
            "report": None if self.report is None else self.report.to_json_dict(),
        }


@dataclass
class ProcedureState:
    """All artifacts of one unit's walk through the four phases."""

    dataset_hash: str
    dmu: str
    scenario: str
    phase: int = 0
    classification: str | None = None       # "efficient" | "inefficient"
    directive: str | None = None
    kappa1: float | None = None
    kappa2: float | None = None
    phase1_solution: M.ModelSolution | None = None
    phase2_solution: M.ModelSolution | None = None
    phase2_checks: dict = field(default_factory=dict)
    phase3_range: dict = field(default_factory=dict)
    phase3_endpoints: list = field(default_factory=list)
    phase3_divergences: dict = field(default_factory=dict)
    trials: list = field(default_factory=list)      # [{"kappa": k, "report": {...}}]
    final_kappa: float | None = None
    final_benchmarks: dict | None = None
    complete: bool = False
    created_at: str | None = None
    updated_at: str | None = None

    def touch(self) -> None:
        now = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        if self.created_at is None:
            self.created_at = now
        self.updated_at = now

    @property
    def plain_kind(self) -> M.ModelKind:
        return M.ModelKind.SPT if self.scenario == SUPER else M.ModelKind.PT

    @property
    def scalar_kind(self) -> M.ModelKind:
        return M.ModelKind.STSC if self.scenario == SUPER else M.ModelKind.TSC

    def interval(self) -> tuple:
        if self.kappa1 is None or self.kappa2 is None:
            raise PhaseOrderError("the scalar interval exists after phase 3")
        return min(self.kappa1, self.kappa2), max(self.kappa1, self.kappa2)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "dataset_hash": self.dataset_hash,
            "dmu": self.dmu,
            "scenario": self.scenario,
            "phase": self.phase,
            "classification": self.classification,
            "directive": self.directive,
            "kappa1": self.kappa1,
            "kappa2": self.kappa2,
            "phase1_solution": None if self.phase1_solution is None else self.phase1_solution.to_json_dict(),
            "phase2_solution": None if self.phase2_solution is None else self.phase2_solution.to_json_dict(),
            "phase2_checks": self.phase2_checks,
            "phase3_range": self.phase3_range,
            "phase3_endpoints": [e.to_json_dict() for e in self.phase3_endpoints],
            "phase3_divergences": self.phase3_divergences,
            "trials": self.trials,
            "final_kappa": self.final_kappa,
            "final_benchmarks": self.final_benchmarks,
            "complete": self.complete,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ProcedureState":
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ProcedureError(f"unsupported session schema {doc.get('schema_version')!r}")
        state = cls(
            dataset_hash=doc["dataset_hash"],
            dmu=doc["dmu"],
            scenario=doc["scenario"],
            phase=doc["phase"],
            classification=doc.get("classification"),
            directive=doc.get("directive"),
            kappa1=doc.get("kappa1"),
            kappa2=doc.get("kappa2"),
            phase2_checks=doc.get("phase2_checks", {}),
            phase3_range=doc.get("phase3_range", {}),
            phase3_divergences=doc.get("phase3_divergences", {}),
            trials=doc.get("trials", []),
            final_kappa=doc.get("final_kappa"),
            final_benchmarks=doc.get("final_benchmarks"),
            complete=doc.get("complete", False),
            created_at=doc.get("created_at"),
            updated_at=doc.get("updated_at"),
        )
        if doc.get("phase1_solution"):
            state.phase1_solution = M.ModelSolution.from_json_dict(doc["phase1_solution"])
        if doc.get("phase2_solution"):
            state.phase2_solution = M.ModelSolution.from_json_dict(doc["phase2_solution"])
        for e in doc.get("phase3_endpoints", []):
            state.phase3_endpoints.append(EndpointRecord(
                kappa=e["kappa"] if e["kappa"] is not None else math.inf,
                side=e["side"], status=e["status"],
                report=None,
            ))
        return state

    @classmethod
    def from_json(cls, text: str) -> "ProcedureState":
        return cls.from_json_dict(json.loads(text))


def phase1(matrix: DecisionMatrix, dmu: str, scenario: str = INEFFICIENCY) -> ProcedureState:
    """Classify the unit and record the first scalar.

    In the inefficiency scenario an efficient unit terminates here with a
    directive to switch to the super-efficiency scenario.
    """
    if scenario not in _SCENARIOS:
        raise ProcedureError(f"unknown scenario {scenario!r}")
    state = ProcedureState(dataset_hash=matrix.content_hash(), dmu=dmu, scenario=scenario)
    state.touch()
    sol = M.evaluate(matrix, state.plain_kind, dmu)
    state.phase1_solution = sol
    state.phase = 1
    if scenario == INEFFICIENCY:
        efficient = sol.step2.adjustment_price <= M.EFFICIENT_TOL
        state.classification = "efficient" if efficient else "inefficient"
        if efficient:
            state.directive = (
                "unit is efficient; the inefficiency procedure stops here - "
                "use the super-efficiency scenario to analyse it further"
            )
            return state
    else:
        state.classification = "efficient"
    state.kappa1 = M.first_scalar(sol)
    return state


def phase2(state: ProcedureState, matrix: DecisionMatrix) -> ProcedureState:
    """Run the scalar family at the first scalar and record the step-I link.

    Step I of the plain and scalar runs must agree on the adjustment price;
    goal prices and virtual prices legitimately diverge in step II.
    """
    if state.phase < 1 or state.kappa1 is None:
        raise PhaseOrderError("phase 2 requires a completed phase 1 with a first scalar")
    sol = M.evaluate(matrix, state.scalar_kind, state.dmu, kappa=state.kappa1,
                     check_efficient=False)
    state.phase2_solution = sol
    plain = state.phase1_solution
    state.phase2_checks = {
        "step1_adjustment_price_plain": float(plain.step1.adjustment_price),
        "step1_adjustment_price_scalar": float(sol.step1.adjustment_price),
        "step1_prices_linked": bool(
            abs(plain.step1.adjustment_price - sol.step1.adjustment_price) <= 1e-7
            * max(1.0, abs(plain.step1.adjustment_price))
        ),
        "step2_tau_plain": float(plain.step2.tau),
        "step2_tau_scalar": float(sol.step2.tau),
        "step2_efficiency_plain": float(plain.efficiency),
        "step2_efficiency_scalar": float(sol.efficiency),
    }
    state.phase = 2
    state.touch()
    return state


def _endpoint_evaluation(matrix, state, kappa: float):
    fixed = (
        state.phase2_solution.step1.input_prices,
        state.phase2_solution.step1.output_prices,
        state.phase2_solution.step1.scalar_price,
    )
    return M.evaluate(matrix, state.scalar_kind, state.dmu, kappa=kappa,
                      check_efficient=False, fixed_prices=fixed)


def phase3(state: ProcedureState, matrix: DecisionMatrix) -> ProcedureState:
    """Range the intensity-sum row and pick the second scalar.

    The allowable interval is computed as the scalar range over which the
    phase-2 step-I virtual prices stay optimal (exact rhs ranging of the
    intensity-sum row, independent of which degenerate basis a pivot path
    happens to produce).  Both raw endpoints are retained; endpoints that
    are degenerate (zero width), nonpositive or infinite are recorded but
    not eligible.  Among eligible endpoints the one with the higher step-II
    efficiency becomes the second scalar.
    """
    if state.phase < 2 or state.phase2_solution is None:
        raise PhaseOrderError("phase 3 requires a completed phase 2")
    kappa1 = state.kappa1
    lo, hi = M.scalar_stability_interval(
        matrix, state.scalar_kind, state.dmu, kappa1, state.phase2_solution.step1)
    decrease, increase = kappa1 - lo, hi - kappa1
    state.phase3_range = {
        "row": matrix.num_inputs + matrix.num_outputs,
        "allowable_decrease": None if math.isinf(decrease) else float(decrease),
        "allowable_increase": None if math.isinf(increase) else float(increase),
    }
    state.phase3_endpoints = []
    for side, width, sign in (("decrease", decrease, -1.0), ("increase", increase, +1.0)):
        kappa = kappa1 + sign * width
        if math.isinf(width):
            state.phase3_endpoints.append(EndpointRecord(kappa=math.inf, side=side, status="infinite"))
            continue
        if width <= _KAPPA_EQ_TOL:
            state.phase3_endpoints.append(EndpointRecord(kappa=kappa1, side=side, status="degenerate"))
            continue
        if kappa <= _KAPPA_EQ_TOL:
            state.phase3_endpoints.append(EndpointRecord(kappa=kappa, side=side, status="nonpositive"))
            continue
        try:
            sol = _endpoint_evaluation(matrix, state, kappa)
        except M.ModelError as exc:
            state.phase3_endpoints.append(
                EndpointRecord(kappa=kappa, side=side, status=f"infeasible: {exc}"))
            continue
        state.phase3_endpoints.append(EndpointRecord(
            kappa=kappa, side=side, status="ok",
            report=analysis.report(matrix, sol), solution=sol,
        ))
    eligible = [e for e in state.phase3_endpoints if e.status == "ok"]
    if not eligible:
        state.kappa2 = kappa1
    elif len(eligible) == 1:
        state.kappa2 = eligible[0].kappa
    else:
        state.kappa2 = max(eligible, key=lambda e: e.report.efficiency).kappa
    chosen = next((e for e in eligible if e.kappa == state.kappa2), None)
    if chosen is not None:
        s2, s1 = chosen.solution, state.phase2_solution
        state.phase3_divergences = {
            "tau_differs": bool(abs(s1.step2.tau - s2.step2.tau) > 1e-9),
            "scalar_price_differs": bool(
                abs((s1.step2.scalar_price or 0.0) - (s2.step2.scalar_price or 0.0)) > 1e-9),
            "ratios_differ": bool(
                np.max(np.abs(s1.step2.input_ratios - s2.step2.input_ratios), initial=0.0) > 1e-9
                or np.max(np.abs(s1.step2.output_ratios - s2.step2.output_ratios), initial=0.0) > 1e-9),
            "reference_same": s1.step2.reference == s2.step2.reference,
        }
    state.phase = 3
    state.touch()
    return state


def phase4_try(state: ProcedureState, matrix: DecisionMatrix, kappa: float,
               override: bool = False) -> analysis.EfficiencyReport:
    """Evaluate a candidate scalar and append it to the trial history.

    Candidates outside the phase-3 bracket are refused unless ``override``
    is set (the bracket is advisory, not a hard feasibility boundary).
    """
    if state.phase < 3:
        raise PhaseOrderError("phase 4 requires a completed phase 3")
    lo, hi = state.interval()
    if not (lo - _KAPPA_EQ_TOL <= kappa <= hi + _KAPPA_EQ_TOL) and not override:
        raise OutOfIntervalError(
            f"scalar {kappa} outside [{lo:.6g}, {hi:.6g}]; pass override to explore anyway"
        )
    if abs(kappa - state.kappa1) <= _KAPPA_EQ_TOL and state.phase2_solution is not None:
        rep = analysis.report(matrix, state.phase2_solution)
    else:
        endpoint = next(
            (e for e in state.phase3_endpoints
             if e.status == "ok" and abs(e.kappa - kappa) <= _KAPPA_EQ_TOL and e.report is not None),
            None,
        )
        if endpoint is not None:
            rep = endpoint.report
        else:
            sol = M.evaluate(matrix, state.scalar_kind, state.dmu, kappa=kappa,
                             check_efficient=False)
            rep = analysis.report(matrix, sol)
    state.trials.append({"kappa": float(kappa), "report": rep.to_json_dict()})
    state.touch()
    return rep


def phase4_commit(state: ProcedureState, kappa: float) -> ProcedureState:
    """Freeze the benchmarks of a previously tried scalar."""
    if state.phase < 3:
        raise PhaseOrderError("phase 4 requires a completed phase 3")
    trial = next((t for t in state.trials if abs(t["kappa"] - kappa) <= _KAPPA_EQ_TOL), None)
    if trial is None:
        raise UntriedScalarError(f"scalar {kappa} has not been tried in this session")
    state.final_kappa = float(kappa)
    state.final_benchmarks = {
        "inputs": list(trial["report"]["benchmark_inputs"]),
        "outputs": list(trial["report"]["benchmark_outputs"]),
    }
    state.phase = 4
    state.complete = True
    state.touch()
    return state


def run_phases(matrix: DecisionMatrix, dmu: str, scenario: str = INEFFICIENCY) -> ProcedureState:
    """Convenience driver for phases 1-3."""
    state = phase1(matrix, dmu, scenario)
    if state.kappa1 is None:
        return state
    phase2(state, matrix)
    phase3(state, matrix)
    return state


@dataclass
class RankingRow:
    dmu: str
    classification: str          # "efficient" | "inefficient"
    score: float
    criterion: str               # weakest (inefficient) or strongest (efficient)
    criterion_ratio: float

    def to_json_dict(self) -> dict:
        return {
            "dmu": self.dmu,
            "class": self.classification,
            "score": float(self.score),
            "criterion": self.criterion,
            "criterion_ratio": float(self.criterion_ratio),
        }


@dataclass
class RankingTable:
    rows: list

    def to_json_dict(self) -> dict:
        return {"rows": [r.to_json_dict() for r in self.rows]}


def _extreme_criterion(matrix: DecisionMatrix, sol: M.ModelSolution) -> tuple:
    ratios = [(f"in:{label}", float(r))
              for (label, _), r in zip(matrix.inputs, sol.step2.input_ratios)]
    ratios += [(f"out:{label}", float(r))
               for (label, _), r in zip(matrix.outputs, sol.step2.output_ratios)]
    return max(ratios, key=lambda item: item[1])


def rank(matrix: DecisionMatrix, scalars: dict | None = None) -> RankingTable:
    """Classify every unit and rank the two tiers.

    Efficient units are ranked by super-efficiency (scalar family when a
    final scalar is supplied, plain otherwise) above inefficient units
    ranked by plain (or scalar) efficiency.  Ties break lexicographically.
    The weakest criterion (largest adjustment ratio) annotates inefficient
    rows; the strongest (largest allowance ratio) annotates efficient rows.
    """
    scalars = scalars or {}
    efficient_rows, inefficient_rows = [], []
    for dmu in matrix.dmus:
        plain = M.evaluate(matrix, M.ModelKind.PT, dmu)
        if plain.step2.adjustment_price <= M.EFFICIENT_TOL:
            kappa = scalars.get(dmu)
            if kappa is not None:
                sol = M.evaluate(matrix, M.ModelKind.STSC, dmu, kappa=kappa,
                                 check_efficient=False)
            else:
                sol = M.evaluate(matrix, M.ModelKind.SPT, dmu, check_efficient=False)
            criterion, ratio = _extreme_criterion(matrix, sol)
            efficient_rows.append(RankingRow(dmu, "efficient", sol.efficiency, criterion, ratio))
        else:
            kappa = scalars.get(dmu)
            if kappa is not None:
                sol = M.evaluate(matrix, M.ModelKind.TSC, dmu, kappa=kappa)
            else:
                sol = plain
            criterion, ratio = _extreme_criterion(matrix, sol)
            inefficient_rows.append(RankingRow(dmu, "inefficient", sol.efficiency, criterion, ratio))
    efficient_rows.sort(key=lambda r: (-r.score, r.dmu))
    inefficient_rows.sort(key=lambda r: (-r.score, r.dmu))
    return RankingTable(rows=efficient_rows + inefficient_rows)


def find_matching_scalar(matrix: DecisionMatrix, dmu: str, target_efficiency: float,
                         scenario: str = INEFFICIENCY, tol: float = 1e-4) -> float:
    """Search the phase-3 bracket for a scalar whose score matches a target.

    Bisection on the scalar-to-score map, bracketing from the first-scalar
    side (a grid scan locates the first sign change, which also covers
    non-monotone stretches).  Raises :class:`NotBracketedError` when the
    target is not attained on the interval.
    """
    state = run_phases(matrix, dmu, scenario)
    if state.kappa1 is None:
        raise ProcedureError(f"{dmu!r} terminated in phase 1; no scalar interval exists")

    def score(kappa: float) -> float:
        if abs(kappa - state.kappa1) <= _KAPPA_EQ_TOL:
            return float(state.phase2_solution.efficiency)
        endpoint = next((e for e in state.phase3_endpoints
                         if e.status == "ok" and abs(e.kappa - kappa) <= _KAPPA_EQ_TOL), None)
        if endpoint is not None:
            return float(endpoint.report.efficiency)
        sol = M.evaluate(matrix, state.scalar_kind, state.dmu, kappa=kappa,
                         check_efficient=False, verify_step2=False)
        return float(sol.efficiency)

    a, b = state.kappa1, state.kappa2
    fa = score(a) - target_efficiency
    if abs(fa) <= tol:
        return float(a)
    fb = score(b) - target_efficiency
    if abs(fb) <= tol:
        return float(b)
    grid = np.linspace(a, b, 17)
    values = [fa] + [score(k) - target_efficiency for k in grid[1:-1]] + [fb]
    lo = hi = None
    for i in range(len(grid) - 1):
        if abs(values[i]) <= tol:
            return float(grid[i])
        if values[i] * values[i + 1] <= 0:
            lo, hi, flo = grid[i], grid[i + 1], values[i]
            break
    else:
        raise NotBracketedError(
            f"target score {target_efficiency} not bracketed on [{min(a, b):.6g}, {max(a, b):.6g}]"
        )
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        fmid = score(mid) - target_efficiency
        if abs(fmid) <= tol:
            return float(mid)
        if flo * fmid <= 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    raise NotBracketedError("bisection failed to converge to the requested tolerance")
