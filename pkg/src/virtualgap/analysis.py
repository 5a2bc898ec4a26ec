"""Post-analysis: scores, benchmarks, virtual scales and 2D geometry.

Every quantity here is a pure derivation from a completed model run
(step-II values).  The central picture is the *virtual-scale plane*: each
unit aggregates to a point (virtual input, virtual output); efficient
points lie on the diagonal (the efficiency equator), the focus unit's score
is the slope of the ray from the origin to its point, and the scalar
families shift the picture through an anchor point encoding the
intensity-sum price split.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import models as M
from .dataset import DecisionMatrix


class AnalysisError(Exception):
    pass


class BenchmarkNotPositiveError(AnalysisError):
    """A computed benchmark volume is nonpositive and cannot be re-evaluated."""


@dataclass
class VirtualScales:
    """Per-unit (virtual input, virtual output) pairs for both steps."""

    dmus: tuple
    alpha: np.ndarray            # step II virtual inputs
    beta: np.ndarray             # step II virtual outputs
    alpha_step1: np.ndarray
    beta_step1: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "dmus": list(self.dmus),
            "alpha": [float(v) for v in self.alpha],
            "beta": [float(v) for v in self.beta],
            "alpha_step1": [float(v) for v in self.alpha_step1],
            "beta_step1": [float(v) for v in self.beta_step1],
        }


@dataclass
class EfficiencyReport:
    """Scores, benchmarks and geometry anchors for one model run."""

    dmu: str
    model: str
    kappa: float | None
    tau: float
    efficiency: float            # E
    inefficiency: float          # F = 1 - E (meaningful for the plain scenario)
    rtvs: float                  # return-to-virtual-scale, 1/E
    adjustment_price: float      # step-II objective, equals the virtual gap
    virtual_gap: float
    gamma: float
    omega: float
    alpha: float                 # focus unit's (affected) virtual input
    beta: float                  # focus unit's (affected) virtual output
    benchmark_alpha: float
    benchmark_beta: float
    anchor: tuple                # (x, y) anchor point
    benchmark_inputs: tuple
    benchmark_outputs: tuple
    input_ratios: tuple
    output_ratios: tuple
    intensities: tuple
    input_prices: tuple
    output_prices: tuple
    scalar_price: float | None
    reference: tuple
    input_shares: tuple          # per-input share of the scalar price
    output_shares: tuple
    intensity_total: float

    def to_json_dict(self) -> dict:
        out = {}
        for key, val in self.__dict__.items():
            if isinstance(val, tuple):
                out[key] = [float(v) if isinstance(v, (int, float, np.floating)) else v for v in val]
            elif isinstance(val, (np.floating, float)):
                out[key] = float(val)
            else:
                out[key] = val
        return out


@dataclass
class PlotGeometry:
    """Everything needed to draw the virtual-scale plane for one run."""

    dmu: str
    model: str
    kappa: float | None
    points: list                 # per unit: label, alpha, beta, flags, quadrant
    focus: dict
    anchor: dict
    projection: dict
    equator: dict
    vectors: dict

    def to_json_dict(self) -> dict:
        return {
            "dmu": self.dmu,
            "model": self.model,
            "kappa": None if self.kappa is None else float(self.kappa),
            "points": self.points,
            "focus": self.focus,
            "anchor": self.anchor,
            "projection": self.projection,
            "equator": self.equator,
            "vectors": self.vectors,
        }


def _scales_for_step(matrix: DecisionMatrix, sol: M.ModelSolution, step) -> tuple:
    """Virtual scales per unit; the focus unit uses the full scalar value."""
    kind = sol.kind
    j_o = matrix.index_of(sol.dmu)
    v, u = step.input_prices, step.output_prices
    w = step.scalar_price or 0.0
    omega = (sol.kappa or 0.0) * w
    gamma = sol.gamma
    sgn = -1.0 if kind.is_super else 1.0
    alpha = np.empty(matrix.num_dmus)
    beta = np.empty(matrix.num_dmus)
    for j in range(matrix.num_dmus):
        shift = omega if j == j_o else w
        alpha[j] = float(v @ matrix.X[:, j]) + sgn * (1.0 - gamma) * shift
        beta[j] = float(u @ matrix.Y[:, j]) - sgn * gamma * shift
    return alpha, beta


def virtual_technology_set(matrix: DecisionMatrix, sol: M.ModelSolution) -> VirtualScales:
    """Per-unit virtual scales for both steps of a completed run."""
    a2, b2 = _scales_for_step(matrix, sol, sol.step2)
    a1, b1 = _scales_for_step(matrix, sol, sol.step1)
    return VirtualScales(dmus=matrix.dmus, alpha=a2, beta=b2, alpha_step1=a1, beta_step1=b1)


def benchmarks(matrix: DecisionMatrix, sol: M.ModelSolution) -> tuple:
    """Benchmark volumes the focus unit should adjust toward.

    Inefficiency families contract inputs and expand outputs; the
    super-efficiency families allow the opposite movement.
    """
    j_o = matrix.index_of(sol.dmu)
    q, p = sol.step2.input_ratios, sol.step2.output_ratios
    x_o, y_o = matrix.X[:, j_o], matrix.Y[:, j_o]
    if sol.kind.is_super:
        return x_o * (1.0 + q), y_o * (1.0 - p)
    return x_o * (1.0 - q), y_o * (1.0 + p)


def _shares(gamma: float, ratios: np.ndarray, weight: float) -> np.ndarray:
    """Split ``weight`` over criteria in proportion to their ratios.

    Falls back to an even split when no ratio is active so the shares always
    sum to ``weight`` and the gap reconstruction stays exact.
    """
    total = float(np.sum(ratios))
    k = len(ratios)
    if total > 1e-12:
        return weight * ratios / total
    return np.full(k, weight / k)


def report(matrix: DecisionMatrix, sol: M.ModelSolution) -> EfficiencyReport:
    """Assemble the full step-II report for one model run."""
    kind = sol.kind
    st = sol.step2
    j_o = matrix.index_of(sol.dmu)
    alpha_all, beta_all = _scales_for_step(matrix, sol, st)
    alpha_o, beta_o = float(alpha_all[j_o]), float(beta_all[j_o])
    eff = beta_o / alpha_o if alpha_o != 0.0 else float("inf")
    rtvs = 1.0 / eff if eff != 0.0 else float("inf")
    bx, by = benchmarks(matrix, sol)
    v, u = st.input_prices, st.output_prices
    omega = sol.omega
    gamma = sol.gamma
    sgn = -1.0 if kind.is_super else 1.0
    bench_alpha = float(v @ bx) + sgn * (1.0 - gamma) * omega
    bench_beta = float(u @ by) - sgn * gamma * omega
    if kind is M.ModelKind.TSC:
        anchor = ((1.0 - gamma) * omega, -gamma * omega)
    elif kind is M.ModelKind.STSC:
        anchor = (-(1.0 - gamma) * omega, gamma * omega)
    else:
        anchor = (0.0, 0.0)
    return EfficiencyReport(
        dmu=sol.dmu,
        model=kind.value,
        kappa=sol.kappa,
        tau=float(st.tau),
        efficiency=float(eff),
        inefficiency=float(1.0 - eff),
        rtvs=float(rtvs),
        adjustment_price=float(st.adjustment_price),
        virtual_gap=float(st.virtual_gap),
        gamma=float(gamma),
        omega=float(omega),
        alpha=alpha_o,
        beta=beta_o,
        benchmark_alpha=bench_alpha,
        benchmark_beta=bench_beta,
        anchor=anchor,
        benchmark_inputs=tuple(float(v_) for v_ in bx),
        benchmark_outputs=tuple(float(v_) for v_ in by),
        input_ratios=tuple(float(v_) for v_ in st.input_ratios),
        output_ratios=tuple(float(v_) for v_ in st.output_ratios),
        intensities=tuple(float(v_) for v_ in st.intensities),
        input_prices=tuple(float(v_) for v_ in v),
        output_prices=tuple(float(v_) for v_ in u),
        scalar_price=None if st.scalar_price is None else float(st.scalar_price),
        reference=st.reference,
        input_shares=tuple(float(v_) for v_ in _shares(gamma, st.input_ratios, 1.0 - gamma)),
        output_shares=tuple(float(v_) for v_ in _shares(gamma, st.output_ratios, gamma)),
        intensity_total=float(np.sum(st.intensities)),
    )


def reevaluate_at_benchmark(matrix: DecisionMatrix, sol: M.ModelSolution) -> EfficiencyReport:
    """Re-run the same model with the focus unit moved to its benchmark.

    The adjusted unit must come out efficient (score 1): the benchmark is an
    intensity combination of peers already on the frontier.  For the
    super-efficiency families the focus unit's column is replaced, which
    evaluates the adjusted unit against the original peer set because the
    unit is excluded from its own references.
    """
    j_o = matrix.index_of(sol.dmu)
    bx, by = benchmarks(matrix, sol)
    floor_x = 1e-9 * matrix.X[:, j_o]
    floor_y = 1e-9 * matrix.Y[:, j_o]
    if np.any(bx <= floor_x) or np.any(by <= floor_y):
        raise BenchmarkNotPositiveError(
            f"benchmark for {sol.dmu!r} has vanishing entries and cannot be re-evaluated "
            "as a positive decision matrix"
        )
    adjusted = matrix.replace_column(sol.dmu, bx, by)
    new_sol = M.evaluate(adjusted, sol.kind, sol.dmu, kappa=sol.kappa,
                         check_efficient=False)
    return report(adjusted, new_sol)


def _quadrant(x: float, y: float, tol: float = 1e-12) -> str:
    if abs(x) <= tol and abs(y) <= tol:
        return "origin"
    if abs(x) <= tol or abs(y) <= tol:
        return "axis"
    if x > 0:
        return "I" if y > 0 else "IV"
    return "II" if y > 0 else "III"


def _vector(tail, head) -> dict:
    dx = float(head[0] - tail[0])
    dy = float(head[1] - tail[1])
    slope = dy / dx if abs(dx) > 1e-15 else None
    return {
        "tail": [float(tail[0]), float(tail[1])],
        "head": [float(head[0]), float(head[1])],
        "dx": dx, "dy": dy, "slope": slope,
    }


def plot_geometry(matrix: DecisionMatrix, sol: M.ModelSolution) -> PlotGeometry:
    """Geometry of the virtual-scale plane for one run.

    Includes the equator diagonal, one point per unit, the focus point, the
    anchor point, the equator projection of the benchmark, and the three
    vectors origin->focus, origin->anchor, anchor->focus.  By construction
    origin->focus is the componentwise sum of the other two and its slope
    equals the efficiency score.
    """
    rep = report(matrix, sol)
    scales = virtual_technology_set(matrix, sol)
    j_o = matrix.index_of(sol.dmu)
    points = []
    for j, label in enumerate(matrix.dmus):
        a, b = float(scales.alpha[j]), float(scales.beta[j])
        points.append({
            "label": label,
            "alpha": a,
            "beta": b,
            "is_reference": label in rep.reference,
            "is_focus": j == j_o,
            "quadrant": _quadrant(a, b),
        })
    focus = (rep.alpha, rep.beta)
    anchor = rep.anchor
    projection = (rep.benchmark_alpha, rep.benchmark_beta)
    vectors = {
        "origin_to_focus": _vector((0.0, 0.0), focus),
        "origin_to_anchor": _vector((0.0, 0.0), anchor),
        "anchor_to_focus": _vector(anchor, focus),
    }
    vectors["origin_to_focus"]["is_efficiency"] = True
    return PlotGeometry(
        dmu=sol.dmu,
        model=sol.kind.value,
        kappa=sol.kappa,
        points=points,
        focus={"alpha": rep.alpha, "beta": rep.beta, "quadrant": _quadrant(*focus)},
        anchor={"x": float(anchor[0]), "y": float(anchor[1]), "quadrant": _quadrant(*anchor)},
        projection={"alpha": float(projection[0]), "beta": float(projection[1])},
        equator={"slope": 1.0, "intercept": 0.0},
        vectors=vectors,
    )
