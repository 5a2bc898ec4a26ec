"""The four virtual-gap model families and their two-step evaluation.

Each family pairs two linear programs over a decision matrix for one unit
under evaluation (the *focus unit*):

* the **adjustment-price side** ("tap"): choose adjustment ratios for every
  input/output and intensities for every peer so that the focus unit reaches
  an intensity-weighted benchmark, pricing each ratio at the goal price;
* the **virtual-gap side** ("tvg"): choose a virtual unit price for every
  criterion (and, in the scalar families, a unit price for the
  intensity-sum condition) minimizing/maximizing the focus unit's virtual
  gap subject to per-peer gap conditions and per-criterion price conditions.

The sides are exact LP duals; both are solved independently and their
objectives cross-checked.  Families:

``pt``    inefficiency, no intensity-sum condition
``tsc``   inefficiency, intensities must sum to a chosen scalar
``spt``   super-efficiency of an efficient unit (unit excluded from peers)
``stsc``  super-efficiency with the intensity-sum condition

The goal price is fixed in two steps: step I solves at goal price 1; step II
rescales so the focus unit's (affected) virtual input is exactly 1 for the
inefficiency families, or its (affected) virtual output is exactly 1 for the
super-efficiency families.  The adjustment ratios and intensities are
invariant to that rescaling; prices and money-valued quantities scale
linearly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import linprog as lpg
from .dataset import DecisionMatrix

FEAS_TOL = lpg.FEAS_TOL
DUAL_TOL = lpg.DUAL_TOL
CS_TOL = lpg.CS_TOL
REFERENCE_TOL = 1e-7        # intensity above this counts as a reference peer
EFFICIENT_TOL = 1e-7        # normalized adjustment price below this is efficient
_STEP2_CHECK_TOL = 1e-9


class ModelError(Exception):
    """Base class for model-level failures."""


class NotEfficientError(ModelError):
    """Super-efficiency was requested for a unit that is not efficient."""


class ModelInfeasibleError(ModelError):
    """The model program is infeasible at the requested scalar/bounds."""

    def __init__(self, message, status="infeasible"):
        super().__init__(message)
        self.status = status


class ScalarError(ModelError):
    """The intensity-sum scalar is missing, misplaced or nonpositive."""


class ModelKind(str, enum.Enum):
    PT = "pt"
    TSC = "tsc"
    SPT = "spt"
    STSC = "stsc"

    @property
    def has_scalar(self) -> bool:
        return self in (ModelKind.TSC, ModelKind.STSC)

    @property
    def is_super(self) -> bool:
        return self in (ModelKind.SPT, ModelKind.STSC)

    @classmethod
    def parse(cls, name) -> "ModelKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ModelError(f"unknown model kind {name!r}") from None


@dataclass(frozen=True)
class RatioBounds:
    """Optional box bounds on the adjustment/allowance ratios.

    Applied as variable bounds in the adjustment-price program; the
    virtual-gap side of a bounded run is read from that program's duals.
    """

    q_lower: tuple | None = None
    q_upper: tuple | None = None
    p_lower: tuple | None = None
    p_upper: tuple | None = None

    def validate(self, m: int, s: int) -> None:
        for name, arr, size in (("q_lower", self.q_lower, m), ("q_upper", self.q_upper, m),
                                ("p_lower", self.p_lower, s), ("p_upper", self.p_upper, s)):
            if arr is not None and len(arr) != size:
                raise ModelError(f"{name} must have {size} entries")
        for low, high, size in ((self.q_lower, self.q_upper, m), (self.p_lower, self.p_upper, s)):
            for k in range(size):
                lo = low[k] if low is not None else 0.0
                hi = high[k] if high is not None else None
                if lo < 0:
                    raise ModelError("ratio bounds must be nonnegative")
                if hi is not None and lo > hi:
                    raise ModelError("ratio lower bound exceeds upper bound")

    @property
    def empty(self) -> bool:
        return all(v is None for v in (self.q_lower, self.q_upper, self.p_lower, self.p_upper))


@dataclass
class StepSolution:
    """One goal-price step of a model run.

    Money-valued fields (prices, adjustment price, virtual gap) are in the
    virtual currency at this step's goal price.
    """

    tau: float
    input_ratios: np.ndarray       # Q, per input
    output_ratios: np.ndarray      # P, per output
    intensities: np.ndarray        # per unit, zero for the focus unit in super families
    input_prices: np.ndarray       # v, per input
    output_prices: np.ndarray      # u, per output
    scalar_price: float | None     # w, None when the family has no intensity-sum condition
    adjustment_price: float        # objective of the adjustment-price side
    virtual_gap: float             # objective of the virtual-gap side
    reference: tuple               # labels of peers with positive intensity

    def to_json_dict(self) -> dict:
        return {
            "tau": float(self.tau),
            "input_ratios": [float(v) for v in self.input_ratios],
            "output_ratios": [float(v) for v in self.output_ratios],
            "intensities": [float(v) for v in self.intensities],
            "input_prices": [float(v) for v in self.input_prices],
            "output_prices": [float(v) for v in self.output_prices],
            "scalar_price": None if self.scalar_price is None else float(self.scalar_price),
            "adjustment_price": float(self.adjustment_price),
            "virtual_gap": float(self.virtual_gap),
            "reference": list(self.reference),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "StepSolution":
        return cls(
            tau=doc["tau"],
            input_ratios=np.asarray(doc["input_ratios"], dtype=float),
            output_ratios=np.asarray(doc["output_ratios"], dtype=float),
            intensities=np.asarray(doc["intensities"], dtype=float),
            input_prices=np.asarray(doc["input_prices"], dtype=float),
            output_prices=np.asarray(doc["output_prices"], dtype=float),
            scalar_price=doc["scalar_price"],
            adjustment_price=doc["adjustment_price"],
            virtual_gap=doc["virtual_gap"],
            reference=tuple(doc["reference"]),
        )


@dataclass
class ModelSolution:
    """Both steps of one model run for one focus unit."""

    kind: ModelKind
    dmu: str
    kappa: float | None
    step1: StepSolution
    step2: StepSolution
    t_bar: float
    gamma: float
    omega: float                   # kappa * step2 scalar price; 0 without the scalar row

    @property
    def efficiency(self) -> float:
        """Step-II score: virtual output over virtual input of the focus unit."""
        if self.kind.is_super:
            denom = 1.0 - self.step2.virtual_gap
            return float("inf") if denom <= 0.0 else 1.0 / denom
        return 1.0 - self.step2.virtual_gap

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "dmu": self.dmu,
            "kappa": None if self.kappa is None else float(self.kappa),
            "step1": self.step1.to_json_dict(),
            "step2": self.step2.to_json_dict(),
            "t_bar": float(self.t_bar),
            "gamma": float(self.gamma),
            "omega": float(self.omega),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ModelSolution":
        return cls(
            kind=ModelKind.parse(doc["kind"]),
            dmu=doc["dmu"],
            kappa=doc["kappa"],
            step1=StepSolution.from_json_dict(doc["step1"]),
            step2=StepSolution.from_json_dict(doc["step2"]),
            t_bar=doc["t_bar"],
            gamma=doc["gamma"],
            omega=doc["omega"],
        )


def peer_indices(matrix: DecisionMatrix, kind: ModelKind, j_o: int) -> list:
    if kind.is_super:
        return [j for j in range(matrix.num_dmus) if j != j_o]
    return list(range(matrix.num_dmus))


def build_program(matrix: DecisionMatrix, kind: ModelKind, dmu: str, tau: float,
                  side: str, kappa: float | None = None,
                  bounds: RatioBounds | None = None) -> lpg.LinearProgram:
    """Build one side of a model as a :class:`LinearProgram`.

    ``side`` is ``"tap"`` (adjustment-price) or ``"tvg"`` (virtual-gap).
    For the super-efficiency families the focus unit is excluded from the
    peer set and the per-criterion price conditions become upper bounds.
    """
    kind = ModelKind.parse(kind)
    j_o = matrix.index_of(dmu)
    if kind.has_scalar:
        if kappa is None or kappa <= 0:
            raise ScalarError(f"{kind.value} requires a positive intensity-sum scalar")
    elif kappa is not None:
        raise ScalarError(f"{kind.value} does not take an intensity-sum scalar")
    X, Y = matrix.X, matrix.Y
    m, s = matrix.num_inputs, matrix.num_outputs
    x_o, y_o = X[:, j_o], Y[:, j_o]
    peers = peer_indices(matrix, kind, j_o)
    npeers = len(peers)

    if side == "tap":
        ncols = npeers + m + s
        A = np.zeros((m + s + (1 if kind.has_scalar else 0), ncols))
        b = np.zeros(A.shape[0])
        rel = []
        for i in range(m):
            A[i, :npeers] = X[i, peers] * (-1.0 if kind.is_super else 1.0)
            A[i, npeers + i] = x_o[i]
            b[i] = -x_o[i] if kind.is_super else x_o[i]
            rel.append(lpg.GREATER if kind.is_super else lpg.EQUAL)
        for r in range(s):
            A[m + r, :npeers] = Y[r, peers] * (1.0 if kind.is_super else -1.0)
            A[m + r, npeers + m + r] = y_o[r]
            b[m + r] = y_o[r] if kind.is_super else -y_o[r]
            rel.append(lpg.EQUAL)
        if kind.has_scalar:
            A[m + s, :npeers] = 1.0
            b[m + s] = kappa
            rel.append(lpg.EQUAL)
        c = np.zeros(ncols)
        c[npeers:] = tau
        lower = upper = None
        if bounds is not None and not bounds.empty:
            bounds.validate(m, s)
            lower = np.full(ncols, np.nan)
            upper = np.full(ncols, np.nan)
            for i in range(m):
                if bounds.q_lower is not None:
                    lower[npeers + i] = bounds.q_lower[i]
                if bounds.q_upper is not None:
                    upper[npeers + i] = bounds.q_upper[i]
            for r in range(s):
                if bounds.p_lower is not None:
                    lower[npeers + m + r] = bounds.p_lower[r]
                if bounds.p_upper is not None:
                    upper[npeers + m + r] = bounds.p_upper[r]
        return lpg.LinearProgram(
            sense="min" if kind.is_super else "max",
            c=c, A=A, relations=tuple(rel), b=b,
            lower=lower, upper=upper,
        )

    if side == "tvg":
        nv = m + s + (1 if kind.has_scalar else 0)
        rows = npeers + m + s
        A = np.zeros((rows, nv))
        b = np.zeros(rows)
        rel = []
        sgn = -1.0 if kind.is_super else 1.0
        for k, j in enumerate(peers):
            A[k, :m] = sgn * X[:, j]
            A[k, m:m + s] = -sgn * Y[:, j]
            if kind.has_scalar:
                A[k, m + s] = 1.0
            rel.append(lpg.LESS if kind.is_super else lpg.GREATER)
        for i in range(m):
            A[npeers + i, i] = x_o[i]
            b[npeers + i] = tau
            rel.append(lpg.LESS if kind.is_super else lpg.GREATER)
        for r in range(s):
            A[npeers + m + r, m + r] = y_o[r]
            b[npeers + m + r] = tau
            rel.append(lpg.LESS if kind.is_super else lpg.GREATER)
        c = np.zeros(nv)
        c[:m] = sgn * x_o
        c[m:m + s] = -sgn * y_o
        if kind.has_scalar:
            c[m + s] = kappa
        if kind.is_super:
            domains = tuple([lpg.NONNEG] * m + [lpg.FREE] * (nv - m))
        else:
            domains = tuple([lpg.FREE] * nv)
        return lpg.LinearProgram(
            sense="max" if kind.is_super else "min",
            c=c, A=A, relations=tuple(rel), b=b, domains=domains,
        )

    raise ModelError(f"unknown side {side!r}; expected 'tap' or 'tvg'")


def _gamma(kind: ModelKind, q: np.ndarray, p: np.ndarray) -> float:
    """Input share of the total adjustment price.

    Defined by the ratio of the input to the total adjustment prices when
    any ratio is active; for a fully efficient solution the scalar families
    fall back to an even split and the plain families to zero (the split
    multiplies a zero scalar price there, so only reporting is affected).
    """
    tq, tp = float(np.sum(q)), float(np.sum(p))
    if tq + tp > 1e-12:
        return tq / (tq + tp)
    return 0.5 if kind.has_scalar else 0.0


def _normalizer(kind: ModelKind, matrix: DecisionMatrix, j_o: int, v: np.ndarray,
                u: np.ndarray, w: float, kappa: float | None, gamma: float) -> float:
    x_o, y_o = matrix.X[:, j_o], matrix.Y[:, j_o]
    if kind is ModelKind.PT:
        return float(v @ x_o)
    if kind is ModelKind.TSC:
        return float(v @ x_o + (1.0 - gamma) * kappa * w)
    if kind is ModelKind.SPT:
        return float(u @ y_o)
    return float(u @ y_o + gamma * kappa * w)


def _unpack_tap(matrix: DecisionMatrix, kind: ModelKind, j_o: int, x: np.ndarray):
    peers = peer_indices(matrix, kind, j_o)
    npeers = len(peers)
    m, s = matrix.num_inputs, matrix.num_outputs
    pi = np.zeros(matrix.num_dmus)
    pi[peers] = x[:npeers]
    return x[npeers:npeers + m].copy(), x[npeers + m:npeers + m + s].copy(), pi


def _tvg_secondary(kind: ModelKind, matrix: DecisionMatrix, j_o: int):
    """Secondary objective chain selecting a canonical virtual-gap optimum.

    The virtual-gap optimal face can be degenerate (always for an efficient
    focus unit).  The canonical choice maximizes the scalar unit price for
    the families with the intensity-sum row (keeping the dual prices on the
    side of the scalar interval explored by the selection procedure) and
    pins the step-II normalizer otherwise: the plain inefficiency family
    minimizes the focus unit's virtual input, the plain super family
    maximizes its virtual output then minimizes its virtual input.  Later
    stages only matter where earlier ones leave freedom.
    """
    m, s = matrix.num_inputs, matrix.num_outputs
    nv = m + s + (1 if kind.has_scalar else 0)
    cost_vx = np.zeros(nv)
    cost_vx[:m] = matrix.X[:, j_o]
    cost_uy = np.zeros(nv)
    cost_uy[m:m + s] = matrix.Y[:, j_o]
    if kind is ModelKind.PT:
        return [(cost_vx, "min")]
    if kind is ModelKind.SPT:
        return [(cost_uy, "max"), (cost_vx, "min")]
    cost_w = np.zeros(nv)
    cost_w[m + s] = 1.0
    if kind is ModelKind.TSC:
        return [(cost_w, "max")]
    return [(cost_w, "max"), (cost_uy, "max")]


def _tvg_from_duals(matrix, kind, j_o, tap_sol):
    """Read the virtual-gap side off the adjustment-price duals (bounded runs)."""
    m, s = matrix.num_inputs, matrix.num_outputs
    duals = tap_sol.duals
    if kind.is_super:
        v = -duals[:m].copy()
        u = duals[m:m + s].copy()
    else:
        v = duals[:m].copy()
        u = -duals[m:m + s].copy()
    w = float(duals[m + s]) if kind.has_scalar else None
    return v, u, w, float(tap_sol.dual_objective)


def _tvg_objective(kind, matrix, j_o, kappa, v, u, w) -> float:
    x_o, y_o = matrix.X[:, j_o], matrix.Y[:, j_o]
    base = float(v @ x_o - u @ y_o)
    if kind is ModelKind.PT:
        return base
    if kind is ModelKind.TSC:
        return base + kappa * w
    if kind is ModelKind.SPT:
        return -base
    return -base + kappa * w


def _tvg_prices_feasible(kind, matrix, j_o, tau, v, u, w) -> bool:
    lp = build_program(matrix, kind, matrix.dmus[j_o], tau, "tvg",
                       kappa=1.0 if kind.has_scalar else None)
    x = np.concatenate([v, u, [w]]) if kind.has_scalar else np.concatenate([v, u])
    return bool(np.all(lpg.feasibility_residuals(lp, x) <= 1e-7))


def _prices_normalizable(kind, matrix, j_o, kappa, gamma, v, u, w, delta) -> bool:
    """Whether step-I prices support the two-step rescaling.

    The focus unit's virtual scales differ by the (fixed) optimal gap, so
    both are positive exactly when the normalizer clears the gap:
    otherwise the rescaled score leaves its theoretical range.
    """
    norm = _normalizer(kind, matrix, j_o, v, u, w or 0.0, kappa, gamma)
    if norm <= 1e-9:
        return False
    if kind.is_super:
        return norm >= delta + 1e-9
    return norm >= delta - 1e-9


def _canonical_tvg(matrix, kind, dmu, j_o, kappa, gamma, delta):
    """Solve the virtual-gap side at goal price 1 with canonical refinement.

    If the canonical chain lands on a vertex whose step-II normalizer is
    unusable (possible for the scalar families when the optimal face is
    wide), re-refine by maximizing the normalizer itself: the face always
    contains the plain-family dual, whose scales are sign-valid, so a
    usable vertex exists whenever the model is meaningful.
    """
    m, s = matrix.num_inputs, matrix.num_outputs
    tvg1 = build_program(matrix, kind, dmu, 1.0, "tvg", kappa=kappa)

    def unpack(sol):
        v = sol.x[:m].copy()
        u = sol.x[m:m + s].copy()
        w = float(sol.x[m + s]) if kind.has_scalar else None
        return v, u, w, float(sol.objective)

    tvg_sol = lpg.solve_lexicographic(tvg1, _tvg_secondary(kind, matrix, j_o))
    if tvg_sol.status != lpg.OPTIMAL:
        raise ModelInfeasibleError(
            f"{kind.value} virtual-gap program is {tvg_sol.status} for {dmu!r}",
            status=tvg_sol.status,
        )
    v, u, w, gap = unpack(tvg_sol)
    if kind.has_scalar and not _prices_normalizable(kind, matrix, j_o, kappa, gamma, v, u, w, delta):
        cost = np.zeros(m + s + 1)
        if kind.is_super:
            cost[m:m + s] = matrix.Y[:, j_o]
            cost[m + s] = gamma * kappa
        else:
            cost[:m] = matrix.X[:, j_o]
            cost[m + s] = (1.0 - gamma) * kappa
        retry = lpg.solve_lexicographic(tvg1, [(cost, "max")])
        if retry.status == lpg.OPTIMAL:
            v2, u2, w2, gap2 = unpack(retry)
            if _prices_normalizable(kind, matrix, j_o, kappa, gamma, v2, u2, w2, delta):
                return v2, u2, w2, gap2
    return v, u, w, gap


def evaluate(matrix: DecisionMatrix, kind: ModelKind | str, dmu: str,
             kappa: float | None = None, bounds: RatioBounds | None = None,
             *, check_efficient: bool = True, verify_step2: bool = True,
             fixed_prices: tuple | None = None) -> ModelSolution:
    """Run both goal-price steps of one model for one focus unit.

    ``fixed_prices`` optionally supplies step-I virtual prices ``(v, u, w)``
    known to be optimal (used when re-evaluating at a ranging endpoint where
    the dual prices of the surrounding interval must be kept); they are
    verified against the fresh adjustment-price objective and discarded if
    no longer optimal.

    Raises
    ------
    NotEfficientError
        for a super-efficiency family on a unit that is not efficient.
    ModelInfeasibleError
        when the program has no feasible point (extreme scalars).
    """
    kind = ModelKind.parse(kind)
    j_o = matrix.index_of(dmu)
    if kind.is_super and check_efficient:
        probe = evaluate(matrix, ModelKind.PT, dmu, check_efficient=False, verify_step2=False)
        if probe.step2.adjustment_price > EFFICIENT_TOL:
            raise NotEfficientError(
                f"{dmu!r} is not efficient (normalized adjustment price "
                f"{probe.step2.adjustment_price:.3g}); super-efficiency is undefined"
            )

    tap1 = build_program(matrix, kind, dmu, 1.0, "tap", kappa=kappa, bounds=bounds)
    tap_sol = lpg.solve(tap1)
    if tap_sol.status != lpg.OPTIMAL:
        raise ModelInfeasibleError(
            f"{kind.value} adjustment-price program is {tap_sol.status} "
            f"for {dmu!r}" + (f" at scalar {kappa}" if kappa is not None else ""),
            status=tap_sol.status,
        )
    q1, p1, pi1 = _unpack_tap(matrix, kind, j_o, tap_sol.x)
    delta1 = float(tap_sol.objective)
    gamma = _gamma(kind, q1, p1)

    used_fixed = False
    if fixed_prices is not None:
        v1, u1, w1 = fixed_prices
        v1 = np.asarray(v1, dtype=float)
        u1 = np.asarray(u1, dtype=float)
        gap1 = _tvg_objective(kind, matrix, j_o, kappa, v1, u1, w1)
        if abs(gap1 - delta1) <= 1e-6 * max(1.0, abs(delta1)) and \
                _tvg_prices_feasible(kind, matrix, j_o, 1.0, v1, u1, w1) and \
                _prices_normalizable(kind, matrix, j_o, kappa, gamma, v1, u1, w1, delta1):
            used_fixed = True
    if not used_fixed:
        if bounds is not None and not bounds.empty:
            v1, u1, w1, gap1 = _tvg_from_duals(matrix, kind, j_o, tap_sol)
        else:
            v1, u1, w1, gap1 = _canonical_tvg(matrix, kind, dmu, j_o, kappa, gamma, delta1)

    scale = max(1.0, abs(delta1))
    if abs(delta1 - gap1) > DUAL_TOL * scale:
        raise ModelError(
            f"adjustment price {delta1!r} and virtual gap {gap1!r} disagree "
            f"beyond tolerance for {kind.value}/{dmu!r}"
        )

    denom = _normalizer(kind, matrix, j_o, v1, u1, w1 or 0.0, kappa, gamma)
    if denom <= 1e-12:
        raise ModelError(
            f"degenerate virtual prices for {kind.value}/{dmu!r}: the step-II "
            f"normalizer is {denom!r}"
        )
    t_bar = 1.0 / denom
    reference = tuple(
        matrix.dmus[j] for j in range(matrix.num_dmus) if pi1[j] > REFERENCE_TOL
    )
    step1 = StepSolution(
        tau=1.0, input_ratios=q1, output_ratios=p1, intensities=pi1,
        input_prices=v1, output_prices=u1,
        scalar_price=w1 if kind.has_scalar else None,
        adjustment_price=delta1, virtual_gap=gap1, reference=reference,
    )
    step2 = StepSolution(
        tau=t_bar, input_ratios=q1.copy(), output_ratios=p1.copy(), intensities=pi1.copy(),
        input_prices=t_bar * v1, output_prices=t_bar * u1,
        scalar_price=t_bar * w1 if kind.has_scalar else None,
        adjustment_price=t_bar * delta1, virtual_gap=t_bar * gap1, reference=reference,
    )

    if verify_step2:
        tap2 = build_program(matrix, kind, dmu, t_bar, "tap", kappa=kappa, bounds=bounds)
        check = lpg.solve(tap2)
        if check.status != lpg.OPTIMAL or \
                abs(check.objective - step2.adjustment_price) > _STEP2_CHECK_TOL * scale:
            raise ModelError(
                f"step-II adjustment price verification failed for {kind.value}/{dmu!r}"
            )

    omega = float((kappa or 0.0) * (step2.scalar_price or 0.0))
    return ModelSolution(
        kind=kind, dmu=dmu, kappa=kappa, step1=step1, step2=step2,
        t_bar=t_bar, gamma=gamma, omega=omega,
    )


def scalar_stability_interval(matrix: DecisionMatrix, kind: ModelKind | str, dmu: str,
                              kappa: float, step1: StepSolution,
                              tol: float = 1e-6) -> tuple:
    """Scalar range over which given step-I virtual prices remain optimal.

    The prices stay optimal at a scalar ``t`` exactly when the
    adjustment-price program admits a feasible point complementary to them:
    intensity only on peers with a zero virtual gap, ratios only on criteria
    whose virtual price sits at the goal price, and tight input rows
    wherever the input price is positive.  Treating the scalar as a decision
    variable, the endpoints of that set are two small LP solves, which is
    exact ranging of the intensity-sum right-hand side independent of which
    degenerate basis a particular pivot path produced.

    Returns ``(lo, hi)``; either end may be infinite.
    """
    kind = ModelKind.parse(kind)
    if not kind.has_scalar:
        raise ScalarError("stability interval is defined for the scalar families")
    j_o = matrix.index_of(dmu)
    X, Y = matrix.X, matrix.Y
    x_o, y_o = X[:, j_o], Y[:, j_o]
    m, s = matrix.num_inputs, matrix.num_outputs
    peers = peer_indices(matrix, kind, j_o)
    v, u, w = step1.input_prices, step1.output_prices, step1.scalar_price or 0.0

    allow_pi = []
    for j in peers:
        gap = float(v @ X[:, j] - u @ Y[:, j])
        gap = (-gap + w) if kind.is_super else (gap + w)
        gscale = max(1.0, abs(float(v @ X[:, j])), abs(float(u @ Y[:, j])))
        allow_pi.append(abs(gap) <= tol * gscale)
    allow_q = [abs(v[i] * x_o[i] - step1.tau) <= tol for i in range(m)]
    allow_p = [abs(u[r] * y_o[r] - step1.tau) <= tol for r in range(s)]

    pi_cols = [j for j, ok in zip(peers, allow_pi) if ok]
    q_cols = [i for i in range(m) if allow_q[i]]
    p_cols = [r for r in range(s) if allow_p[r]]
    nv = len(pi_cols) + len(q_cols) + len(p_cols) + 1   # trailing column is t
    t_col = nv - 1
    rows, rhs, rel = [], [], []
    for i in range(m):
        row = np.zeros(nv)
        for k, j in enumerate(pi_cols):
            row[k] = -X[i, j] if kind.is_super else X[i, j]
        if i in q_cols:
            row[len(pi_cols) + q_cols.index(i)] = x_o[i]
        if kind.is_super:
            rhs.append(-x_o[i])
            rel.append(lpg.EQUAL if v[i] > tol else lpg.GREATER)
        else:
            rhs.append(x_o[i])
            rel.append(lpg.EQUAL)
        rows.append(row)
    for r in range(s):
        row = np.zeros(nv)
        for k, j in enumerate(pi_cols):
            row[k] = Y[r, j] if kind.is_super else -Y[r, j]
        if r in p_cols:
            row[len(pi_cols) + len(q_cols) + p_cols.index(r)] = y_o[r]
        rhs.append(y_o[r] if kind.is_super else -y_o[r])
        rel.append(lpg.EQUAL)
        rows.append(row)
    sic = np.zeros(nv)
    sic[:len(pi_cols)] = 1.0
    sic[t_col] = -1.0
    rows.append(sic)
    rhs.append(0.0)
    rel.append(lpg.EQUAL)
    A = np.vstack(rows)
    cost = np.zeros(nv)
    cost[t_col] = 1.0

    out = []
    for sense in ("min", "max"):
        sol = lpg.solve(lpg.LinearProgram(sense=sense, c=cost, A=A, relations=tuple(rel), b=rhs))
        if sol.status == lpg.UNBOUNDED:
            out.append(-np.inf if sense == "min" else np.inf)
        elif sol.status == lpg.OPTIMAL:
            out.append(float(sol.objective))
        else:
            out.append(kappa)   # misclassification fallback: zero-width side
    lo, hi = out
    return min(lo, kappa), max(hi, kappa)


def first_scalar(sol: ModelSolution) -> float:
    """Total reference intensity of a plain-family run: the first scalar."""
    if sol.kind.has_scalar:
        raise ModelError("the first scalar is defined by the plain families only")
    return float(np.sum(sol.step2.intensities))


def verify_complementary_slackness(matrix: DecisionMatrix, sol: ModelSolution):
    """Residuals of every pairing between the two sides at the step-II optimum.

    Returns a list of ``{"name": ..., "value": ...}`` entries; all values are
    at most ``CS_TOL`` for a genuine optimum.  Callers assert.
    """
    kind = sol.kind
    j_o = matrix.index_of(sol.dmu)
    st = sol.step2
    X, Y = matrix.X, matrix.Y
    x_o, y_o = X[:, j_o], Y[:, j_o]
    v, u, w = st.input_prices, st.output_prices, st.scalar_price or 0.0
    pi, q, p = st.intensities, st.input_ratios, st.output_ratios
    tau = st.tau
    res = []
    sgn = 1.0 if kind.is_super else -1.0
    for i in range(matrix.num_inputs):
        bench = float(X[i] @ pi)
        res.append({
            "name": f"input_row_{i}",
            "value": abs((bench - x_o[i] * (1.0 + sgn * q[i])) * v[i]),
        })
    for r in range(matrix.num_outputs):
        bench = float(Y[r] @ pi)
        res.append({
            "name": f"output_row_{r}",
            "value": abs((bench - y_o[r] * (1.0 - sgn * p[r])) * u[r]),
        })
    for j in range(matrix.num_dmus):
        if kind.is_super and j == j_o:
            continue
        gap = float(v @ X[:, j] - u @ Y[:, j])
        gap = (-gap + w) if kind.is_super else (gap + w)
        res.append({"name": f"gap_{matrix.dmus[j]}", "value": abs(gap * pi[j])})
    for i in range(matrix.num_inputs):
        res.append({
            "name": f"price_input_{i}",
            "value": abs((v[i] * x_o[i] - tau) * q[i]),
        })
    for r in range(matrix.num_outputs):
        res.append({
            "name": f"price_output_{r}",
            "value": abs((u[r] * y_o[r] - tau) * p[r]),
        })
    if kind.has_scalar:
        res.append({
            "name": "scalar_row",
            "value": abs((float(np.sum(pi)) - sol.kappa) * w),
        })
    return res
