"""Additive DEA baseline models (envelopment and multiplier sides).

Classical slack-maximizing efficiency measurement used side by side with
the virtual-gap models for comparison.  The envelopment program maximizes
the weighted slacks of the unit under evaluation against an intensity
combination of all units; the multiplier program is its LP dual with
per-criterion weight floors.  With the convexity row the model is the
variable-returns-to-scale variant; without it, constant returns.

Unbounded or infeasible sides are first-class findings here, not errors:
the comparison records them verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linprog as lpg, models as M
from .dataset import DecisionMatrix

CRS, VRS = "crs", "vrs"


class AdditiveError(Exception):
    pass


@dataclass(frozen=True)
class AdditiveConfig:
    """Returns-to-scale choice and per-criterion goal weights (default 1)."""

    returns_to_scale: str = CRS
    input_weights: tuple | None = None
    output_weights: tuple | None = None

    def weights(self, m: int, s: int) -> tuple:
        bx = np.ones(m) if self.input_weights is None else np.asarray(self.input_weights, float)
        by = np.ones(s) if self.output_weights is None else np.asarray(self.output_weights, float)
        if bx.shape != (m,) or by.shape != (s,):
            raise AdditiveError("goal weight vectors must match the criteria counts")
        if np.any(bx <= 0) or np.any(by <= 0):
            raise AdditiveError("goal weights must be positive")
        if self.returns_to_scale not in (CRS, VRS):
            raise AdditiveError(f"unknown returns-to-scale {self.returns_to_scale!r}")
        return bx, by


@dataclass
class AdditiveSolution:
    """Both sides of one additive run; check the statuses before the values."""

    dmu: str
    returns_to_scale: str
    envelopment_status: str
    multiplier_status: str
    inefficiency: float | None = None        # envelopment objective
    multiplier_inefficiency: float | None = None
    input_slacks: tuple | None = None
    output_slacks: tuple | None = None
    intensities: tuple | None = None
    input_weights: tuple | None = None        # multiplier-side v
    output_weights: tuple | None = None       # multiplier-side u
    scale_offset: float | None = None         # free offset, VRS only
    reference: tuple = ()

    @property
    def efficient(self) -> bool | None:
        if self.envelopment_status != lpg.OPTIMAL:
            return None
        return bool(self.inefficiency <= 1e-7)

    def to_json_dict(self) -> dict:
        def tolist(v):
            return None if v is None else [float(t) for t in v]
        return {
            "dmu": self.dmu,
            "returns_to_scale": self.returns_to_scale,
            "envelopment_status": self.envelopment_status,
            "multiplier_status": self.multiplier_status,
            "inefficiency": self.inefficiency,
            "multiplier_inefficiency": self.multiplier_inefficiency,
            "input_slacks": tolist(self.input_slacks),
            "output_slacks": tolist(self.output_slacks),
            "intensities": tolist(self.intensities),
            "input_weights": tolist(self.input_weights),
            "output_weights": tolist(self.output_weights),
            "scale_offset": self.scale_offset,
            "reference": list(self.reference),
            "efficient": self.efficient,
        }


def envelopment_program(matrix: DecisionMatrix, dmu: str, cfg: AdditiveConfig) -> lpg.LinearProgram:
    """max b_x . s_x + b_y . s_y  s.t.  X l + s_x = x_o, Y l - s_y = y_o (, sum l = 1)."""
    j_o = matrix.index_of(dmu)
    m, s, n = matrix.num_inputs, matrix.num_outputs, matrix.num_dmus
    bx, by = cfg.weights(m, s)
    vrs = cfg.returns_to_scale == VRS
    rows = m + s + (1 if vrs else 0)
    ncols = n + m + s
    A = np.zeros((rows, ncols))
    b = np.zeros(rows)
    for i in range(m):
        A[i, :n] = matrix.X[i]
        A[i, n + i] = 1.0
        b[i] = matrix.X[i, j_o]
    for r in range(s):
        A[m + r, :n] = matrix.Y[r]
        A[m + r, n + m + r] = -1.0
        b[m + r] = matrix.Y[r, j_o]
    if vrs:
        A[m + s, :n] = 1.0
        b[m + s] = 1.0
    c = np.concatenate([np.zeros(n), bx, by])
    return lpg.LinearProgram(sense="max", c=c, A=A, relations=(lpg.EQUAL,) * rows, b=b)


def multiplier_program(matrix: DecisionMatrix, dmu: str, cfg: AdditiveConfig) -> lpg.LinearProgram:
    """min v.x_o - u.y_o (+ offset)  s.t. per-unit excess >= 0, v >= b_x, u >= b_y."""
    j_o = matrix.index_of(dmu)
    m, s, n = matrix.num_inputs, matrix.num_outputs, matrix.num_dmus
    bx, by = cfg.weights(m, s)
    vrs = cfg.returns_to_scale == VRS
    nv = m + s + (1 if vrs else 0)
    rows = n + m + s
    A = np.zeros((rows, nv))
    b = np.zeros(rows)
    rel = []
    for j in range(n):
        A[j, :m] = matrix.X[:, j]
        A[j, m:m + s] = -matrix.Y[:, j]
        if vrs:
            A[j, m + s] = 1.0
        rel.append(lpg.GREATER)
    for i in range(m):
        A[n + i, i] = 1.0
        b[n + i] = bx[i]
        rel.append(lpg.GREATER)
    for r in range(s):
        A[n + m + r, m + r] = 1.0
        b[n + m + r] = by[r]
        rel.append(lpg.GREATER)
    c = np.zeros(nv)
    c[:m] = matrix.X[:, j_o]
    c[m:m + s] = -matrix.Y[:, j_o]
    if vrs:
        c[m + s] = 1.0
        domains = tuple([lpg.FREE] * nv)
    else:
        domains = tuple([lpg.FREE] * (m + s))
    return lpg.LinearProgram(sense="min", c=c, A=A, relations=tuple(rel), b=b, domains=domains)


def evaluate_additive(matrix: DecisionMatrix, dmu: str, cfg: AdditiveConfig | None = None) -> AdditiveSolution:
    """Solve envelopment and multiplier sides; statuses are reported verbatim."""
    cfg = cfg or AdditiveConfig()
    m, s, n = matrix.num_inputs, matrix.num_outputs, matrix.num_dmus
    env = lpg.solve(envelopment_program(matrix, dmu, cfg))
    mult = lpg.solve(multiplier_program(matrix, dmu, cfg))
    out = AdditiveSolution(
        dmu=dmu, returns_to_scale=cfg.returns_to_scale,
        envelopment_status=env.status, multiplier_status=mult.status,
    )
    if env.status == lpg.OPTIMAL:
        out.inefficiency = float(env.objective)
        lam = env.x[:n]
        out.intensities = tuple(float(v) for v in lam)
        out.input_slacks = tuple(float(v) for v in env.x[n:n + m])
        out.output_slacks = tuple(float(v) for v in env.x[n + m:])
        out.reference = tuple(matrix.dmus[j] for j in range(n) if lam[j] > 1e-7)
    if mult.status == lpg.OPTIMAL:
        out.multiplier_inefficiency = float(mult.objective)
        out.input_weights = tuple(float(v) for v in mult.x[:m])
        out.output_weights = tuple(float(v) for v in mult.x[m:m + s])
        if cfg.returns_to_scale == VRS:
            out.scale_offset = float(mult.x[m + s])
    return out


def compare(matrix: DecisionMatrix, dmu: str, cfg: AdditiveConfig | None = None) -> dict:
    """Run additive DEA and the virtual-gap models side by side.

    Emits the comparison rows the two approaches differ on: score
    boundedness, whether the multiplier side pins the virtual input at 1,
    reference-set overlap, and solver statuses.  The scalar-family run uses
    the intensity-sum value 1 (the convexity analogue).
    """
    cfg = cfg or AdditiveConfig()
    dea = evaluate_additive(matrix, dmu, cfg)
    plain = M.evaluate(matrix, M.ModelKind.PT, dmu)
    scalar = None
    scalar_error = None
    try:
        scalar = M.evaluate(matrix, M.ModelKind.TSC, dmu, kappa=1.0)
    except M.ModelError as exc:
        scalar_error = str(exc)

    j_o = matrix.index_of(dmu)
    record = {
        "dmu": dmu,
        "returns_to_scale": cfg.returns_to_scale,
        "dea": dea.to_json_dict(),
        "vga": {
            "plain_efficiency": float(plain.efficiency),
            "plain_inefficiency": float(1.0 - plain.efficiency),
            "scalar_at_one_efficiency": None if scalar is None else float(scalar.efficiency),
            "scalar_at_one_error": scalar_error,
            "reference": list(plain.step2.reference),
        },
        "flags": {
            "vga_score_in_unit_interval": bool(-1e-9 <= plain.efficiency <= 1 + 1e-9),
            "vga_virtual_input_is_one": bool(
                abs(plain.step2.input_prices @ matrix.X[:, j_o] - 1.0) <= 1e-7),
            "dea_bounded": dea.multiplier_status == lpg.OPTIMAL
            and dea.envelopment_status == lpg.OPTIMAL,
            "agree_on_efficiency": None,
            "reference_overlap": None,
            "dea_virtual_input": None,
            "dea_virtual_input_is_one": None,
        },
    }
    vga_efficient = plain.step2.adjustment_price <= M.EFFICIENT_TOL
    if dea.efficient is not None:
        record["flags"]["agree_on_efficiency"] = bool(dea.efficient == vga_efficient)
    if dea.reference and plain.step2.reference:
        a, b = set(dea.reference), set(plain.step2.reference)
        record["flags"]["reference_overlap"] = len(a & b) / len(a | b)
    if dea.input_weights is not None:
        virt_in = float(np.asarray(dea.input_weights) @ matrix.X[:, j_o])
        record["flags"]["dea_virtual_input"] = virt_in
        record["flags"]["dea_virtual_input_is_one"] = bool(abs(virt_in - 1.0) <= 1e-7)
    return record
