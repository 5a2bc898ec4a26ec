"""Dense two-phase simplex solver with duals, reduced costs and rhs ranging.

The solver is deliberately self-contained: every downstream model needs the
optimal basis (for right-hand-side ranging) and exact dual prices, neither of
which generic LP front ends expose.  Problems here are small (tens of rows),
so the implementation favours clarity and determinism over sparse algebra:

* two-phase revised simplex on a dense equality standard form,
* Dantzig pricing for a warm phase, then Bland's rule (guaranteed
  termination), with deterministic tie-breaking by lowest column index,
* row/column equilibration to unit max-norm used only to steer pivoting;
  all reported quantities are recomputed from the unscaled data and the
  final basis.

Dual values follow the shadow-price convention: ``duals[i]`` is the rate of
change of the optimal objective per unit of ``b[i]``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-8
DUAL_TOL = 1e-7
CS_TOL = 1e-7
PIVOT_TOL = 1e-10
_OPT_TOL = 1e-9
_DANTZIG_ITERS = 200
_MAX_ITERS = 20000

LESS, EQUAL, GREATER = "<=", "=", ">="
_RELATIONS = (LESS, EQUAL, GREATER)

NONNEG, FREE = "nonneg", "free"

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


class LinearProgramError(Exception):
    """Base class for solver errors."""


class DimensionError(LinearProgramError):
    """Raised when the pieces of a program do not agree in shape."""


class NumericalInstabilityError(LinearProgramError):
    """Raised when no acceptable pivot remains (magnitude below tolerance)."""


class OracleSizeError(LinearProgramError):
    """Raised when a problem is too large for exhaustive vertex enumeration."""


class BasisUnavailableError(LinearProgramError):
    """Raised when ranging is requested without an optimal basis."""


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """An LP instance: optimize ``c @ x`` subject to ``A x (<=,=,>=) b``.

    Parameters
    ----------
    sense : "min" or "max"
    c : (n,) cost vector
    A : (m, n) dense constraint matrix
    relations : m row relations, each one of "<=", "=", ">="
    b : (m,) right-hand side
    domains : per-variable "nonneg" (default) or "free"
    lower, upper : optional per-variable finite bounds (NaN means absent)
    """

    sense: str
    c: np.ndarray
    A: np.ndarray
    relations: tuple
    b: np.ndarray
    domains: tuple = ()
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, dtype=float)))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))
        object.__setattr__(self, "relations", tuple(self.relations))
        if not self.domains:
            object.__setattr__(self, "domains", tuple(NONNEG for _ in range(self.num_vars)))
        else:
            object.__setattr__(self, "domains", tuple(self.domains))
        self.validate()

    @property
    def num_vars(self) -> int:
        return self.A.shape[1]

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    def validate(self) -> None:
        m, n = self.A.shape
        if self.sense not in ("min", "max"):
            raise DimensionError(f"unknown sense {self.sense!r}")
        if self.c.shape != (n,):
            raise DimensionError(f"cost vector has {self.c.shape[0]} entries, matrix has {n} columns")
        if self.b.shape != (m,):
            raise DimensionError(f"rhs has {self.b.shape[0]} entries, matrix has {m} rows")
        if len(self.relations) != m:
            raise DimensionError(f"{len(self.relations)} relations for {m} rows")
        for rel in self.relations:
            if rel not in _RELATIONS:
                raise DimensionError(f"unknown relation {rel!r}")
        if len(self.domains) != n:
            raise DimensionError(f"{len(self.domains)} domains for {n} variables")
        for dom in self.domains:
            if dom not in (NONNEG, FREE):
                raise DimensionError(f"unknown domain {dom!r}")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.c))):
            raise DimensionError("program contains non-finite data")
        lo, up = self._bound_arrays()
        bad = ~np.isnan(lo) & ~np.isnan(up) & (lo > up)
        if np.any(bad):
            raise DimensionError(f"lower bound exceeds upper bound for variable {int(np.argmax(bad))}")

    def _bound_arrays(self):
        n = self.num_vars
        lo = np.full(n, np.nan) if self.lower is None else np.asarray(self.lower, dtype=float)
        up = np.full(n, np.nan) if self.upper is None else np.asarray(self.upper, dtype=float)
        if lo.shape != (n,) or up.shape != (n,):
            raise DimensionError("bound arrays must have one entry per variable")
        return lo, up

    def _bound_rows(self):
        """Finite variable bounds in the order they are appended as rows."""
        lo, up = self._bound_arrays()
        rows = []
        for j in range(self.num_vars):
            if not np.isnan(lo[j]) and not (self.domains[j] == NONNEG and lo[j] == 0.0):
                rows.append((j, GREATER, lo[j]))
            if not np.isnan(up[j]):
                rows.append((j, LESS, up[j]))
        return rows


@dataclass
class LpSolution:
    """Result of :func:`solve`.

    ``duals`` uses the shadow-price convention (d objective / d b[i]) and
    ``dual_objective`` includes the contribution of active variable bounds so
    that strong duality ``objective == dual_objective`` holds at an optimum.
    """

    status: str
    objective: float | None = None
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    basis: tuple | None = None
    dual_objective: float | None = None
    _std: "_StandardForm | None" = field(default=None, repr=False)

    def to_json_dict(self) -> dict:
        out = {"status": self.status}
        if self.status == OPTIMAL:
            out["objective"] = self.objective
            out["x"] = [float(v) for v in self.x]
            out["duals"] = [float(v) for v in self.duals]
            out["reduced_costs"] = [float(v) for v in self.reduced_costs]
            out["basis"] = list(self.basis)
            out["dual_objective"] = self.dual_objective
        return out


@dataclass
class RhsRange:
    """Allowable rhs perturbation interval for one row at the optimal basis.

    Perturbing ``b[row]`` by any t in (-decrease, +increase) keeps the
    returned basis feasible, hence optimal, with the same dual prices.
    """

    row: int
    decrease: float
    increase: float


@dataclass
class _StandardForm:
    """Equality form ``min cw @ z, A z = b, z >= 0`` plus bookkeeping."""

    A: np.ndarray
    b: np.ndarray
    cw: np.ndarray
    obj_sign: float
    row_flip: np.ndarray           # +-1 per (kept) combined row
    col_var: list                  # per column: (orig var index, sign) or None
    col_label: list                # per column: "x3", "x3-", "s1", "a2"
    artificial: np.ndarray         # bool mask per column
    basis: list = field(default_factory=list)
    kept_rows: list = field(default_factory=list)  # combined row index per kept row


def _build_standard_form(lp: LinearProgram) -> _StandardForm:
    rows_A = [lp.A]
    rows_rel = list(lp.relations)
    rows_b = list(lp.b)
    n = lp.num_vars
    for j, rel, rhs in lp._bound_rows():
        row = np.zeros(n)
        row[j] = 1.0
        rows_A.append(row[None, :])
        rows_rel.append(rel)
        rows_b.append(rhs)
    A = np.vstack(rows_A)
    b = np.asarray(rows_b, dtype=float)
    m = A.shape[0]

    obj_sign = 1.0 if lp.sense == "min" else -1.0
    cw = obj_sign * lp.c

    # Free variables are split into a difference of nonnegatives.
    cols, col_var, col_label, cc = [], [], [], []
    for j in range(n):
        cols.append(A[:, j])
        col_var.append((j, +1.0))
        col_label.append(f"x{j}")
        cc.append(cw[j])
        if lp.domains[j] == FREE:
            cols.append(-A[:, j])
            col_var.append((j, -1.0))
            col_label.append(f"x{j}-")
            cc.append(-cw[j])

    row_flip = np.where(b < 0, -1.0, 1.0)
    Ai = np.column_stack(cols) * row_flip[:, None]
    bi = b * row_flip
    rel_flipped = []
    for i, rel in enumerate(rows_rel):
        if row_flip[i] < 0 and rel != EQUAL:
            rel = LESS if rel == GREATER else GREATER
        rel_flipped.append(rel)

    n_struct = len(cols)
    slack_cols = []
    basis = [-1] * m
    art_rows = []
    for i, rel in enumerate(rel_flipped):
        if rel == LESS:
            col = np.zeros(m)
            col[i] = 1.0
            slack_cols.append(col)
            col_var.append(None)
            col_label.append(f"s{i}")
            cc.append(0.0)
            basis[i] = n_struct + len(slack_cols) - 1
        elif rel == GREATER:
            col = np.zeros(m)
            col[i] = -1.0
            slack_cols.append(col)
            col_var.append(None)
            col_label.append(f"s{i}")
            cc.append(0.0)
            art_rows.append(i)
        else:
            art_rows.append(i)
    n_slacked = n_struct + len(slack_cols)
    art_cols = []
    for i in art_rows:
        col = np.zeros(m)
        col[i] = 1.0
        art_cols.append(col)
        col_var.append(None)
        col_label.append(f"a{i}")
        cc.append(0.0)
    blocks = [Ai]
    if slack_cols:
        blocks.append(np.column_stack(slack_cols))
    if art_cols:
        blocks.append(np.column_stack(art_cols))
    A_full = np.hstack(blocks)
    artificial = np.zeros(A_full.shape[1], dtype=bool)
    artificial[n_slacked:] = True
    for k, i in enumerate(art_rows):
        basis[i] = n_slacked + k

    return _StandardForm(
        A=A_full,
        b=bi,
        cw=np.asarray(cc, dtype=float),
        obj_sign=obj_sign,
        row_flip=row_flip,
        col_var=col_var,
        col_label=col_label,
        artificial=artificial,
        basis=basis,
        kept_rows=list(range(m)),
    )


def _equilibrate(A: np.ndarray, b: np.ndarray):
    """Scale rows then columns to unit max-norm (pivot guidance only)."""
    r = np.max(np.abs(A), axis=1)
    r[r < PIVOT_TOL] = 1.0
    As = A / r[:, None]
    s = np.max(np.abs(As), axis=0)
    s[s < PIVOT_TOL] = 1.0
    As = As / s[None, :]
    return As, b / r, s


class _Simplex:
    """Revised simplex over one scaled standard form."""

    def __init__(self, A, b, basis, n_real):
        self.A = A
        self.b = b
        self.basis = list(basis)
        self.m, self.n = A.shape
        self.n_real = n_real  # columns at or above this index are artificial

    def _btran(self, c_b):
        return np.linalg.solve(self.A[:, self.basis].T, c_b)

    def _ftran(self, col):
        return np.linalg.solve(self.A[:, self.basis], col)

    def basic_values(self):
        return self._ftran(self.b)

    def run(self, cost, allowed, max_iters=_MAX_ITERS):
        """Minimize ``cost``; returns "optimal" or "unbounded".

        ``allowed`` masks the columns permitted to enter the basis.
        """
        for it in range(max_iters):
            try:
                y = self._btran(cost[self.basis])
            except np.linalg.LinAlgError:
                raise NumericalInstabilityError("singular basis encountered")
            d = cost - y @ self.A
            d[self.basis] = 0.0
            candidates = np.where(allowed & (d < -_OPT_TOL))[0]
            if candidates.size == 0:
                return OPTIMAL
            if it < _DANTZIG_ITERS:
                enter = int(candidates[int(np.argmin(d[candidates]))])
            else:
                enter = int(candidates[0])  # Bland: lowest eligible index
            u = self._ftran(self.A[:, enter])
            xb = self.basic_values()
            pos = u > PIVOT_TOL
            if not np.any(pos):
                # Entries at or below the pivot tolerance are numerically
                # zero: the direction is unblocked.
                return UNBOUNDED
            ratios = np.full(self.m, np.inf)
            ratios[pos] = np.maximum(xb[pos], 0.0) / u[pos]
            theta = float(ratios.min())
            ties = np.where(ratios <= theta + 1e-12)[0]
            # Prefer evicting artificials, then lowest basis column index (Bland).
            leave = min(ties, key=lambda i: (self.basis[i] < self.n_real, self.basis[i]))
            self.basis[int(leave)] = enter
        raise NumericalInstabilityError("iteration limit exceeded")


def solve(lp: LinearProgram) -> LpSolution:
    """Solve an LP to optimality, or report infeasible/unbounded.

    Deterministic: identical inputs produce identical solutions (fixed
    pivoting rules, no randomization).
    """
    std = _build_standard_form(lp)
    As, bs, col_scale = _equilibrate(std.A, std.b)
    n_real = int(np.count_nonzero(~std.artificial))
    sx = _Simplex(As, bs, std.basis, n_real)

    if np.any(std.artificial):
        phase1_cost = std.artificial.astype(float)
        status = sx.run(phase1_cost, np.ones(sx.n, dtype=bool))
        if status != OPTIMAL:
            raise NumericalInstabilityError("phase-1 did not terminate cleanly")
        xb = sx.basic_values()
        art_val = float(sum(xb[i] for i in range(sx.m) if std.artificial[sx.basis[i]]))
        if art_val > 1e-7:
            return LpSolution(status=INFEASIBLE)
        _evict_artificials(sx, std)

    # The column scaling substitutes z' = s * z, so the phase-2 cost must be
    # expressed in the scaled variables to keep pivoting consistent.
    status = sx.run(std.cw / col_scale, ~std.artificial)
    if status == UNBOUNDED:
        return LpSolution(status=UNBOUNDED)

    std.basis = list(sx.basis)
    return _extract_solution(lp, std)


def _evict_artificials(sx: _Simplex, std: _StandardForm) -> None:
    """Pivot zero-valued artificials out of the basis; drop redundant rows."""
    drop_rows = []
    for i in range(sx.m):
        if not std.artificial[sx.basis[i]]:
            continue
        ei = np.zeros(sx.m)
        ei[i] = 1.0
        row = np.linalg.solve(sx.A[:, sx.basis].T, ei) @ sx.A
        choices = [
            int(j)
            for j in np.where((~std.artificial) & (np.abs(row) > PIVOT_TOL))[0]
            if j not in sx.basis
        ]
        if choices:
            sx.basis[i] = choices[0]
        else:
            drop_rows.append(i)
    if drop_rows:
        keep = [i for i in range(sx.m) if i not in drop_rows]
        sx.A = sx.A[keep]
        sx.b = sx.b[keep]
        sx.basis = [sx.basis[i] for i in keep]
        sx.m = len(keep)
        std.A = std.A[keep]
        std.b = std.b[keep]
        std.row_flip = std.row_flip[keep]
        std.kept_rows = [std.kept_rows[i] for i in keep]


def _extract_solution(lp: LinearProgram, std: _StandardForm) -> LpSolution:
    """Recompute everything from the unscaled data and the final basis."""
    B = std.A[:, std.basis]
    xb = np.linalg.solve(B, std.b)
    z = np.zeros(std.A.shape[1])
    z[std.basis] = xb
    x = np.zeros(lp.num_vars)
    for col, var in enumerate(std.col_var):
        if var is not None:
            j, sgn = var
            x[j] += sgn * z[col]

    y_int = np.linalg.solve(B.T, std.cw[std.basis])
    d_int = std.cw - y_int @ std.A

    bound_rows = lp._bound_rows()
    y_comb = np.zeros(lp.num_rows + len(bound_rows))
    for pos, comb_row in enumerate(std.kept_rows):
        y_comb[comb_row] = std.obj_sign * std.row_flip[pos] * y_int[pos]

    duals = y_comb[: lp.num_rows]
    objective = float(std.obj_sign * (std.cw[std.basis] @ xb))
    dual_objective = float(
        duals @ lp.b
        + sum(y_comb[lp.num_rows + k] * rhs for k, (_, _, rhs) in enumerate(bound_rows))
    )

    reduced = np.zeros(lp.num_vars)
    for col, var in enumerate(std.col_var):
        if var is not None and var[1] > 0:
            reduced[var[0]] = std.obj_sign * d_int[col]

    basis_id = tuple(sorted(std.col_label[j] for j in std.basis))
    return LpSolution(
        status=OPTIMAL,
        objective=objective,
        x=x,
        duals=duals,
        reduced_costs=reduced,
        basis=basis_id,
        dual_objective=dual_objective,
        _std=std,
    )


def rhs_range(lp: LinearProgram, solution: LpSolution, row: int) -> RhsRange:
    """Closed-form stability interval of ``b[row]`` at the optimal basis.

    The interval is the set of perturbations keeping every basic variable
    nonnegative, i.e. keeping the returned basis feasible and therefore
    optimal with unchanged dual prices.
    """
    if solution.status != OPTIMAL or solution._std is None:
        raise BasisUnavailableError("ranging requires an optimal solution with a basis")
    if not (0 <= row < lp.num_rows):
        raise DimensionError(f"row {row} out of range")
    std = solution._std
    if row not in std.kept_rows:
        # The row was dropped as redundant: any perturbation breaks consistency.
        return RhsRange(row=row, decrease=0.0, increase=0.0)
    pos = std.kept_rows.index(row)
    B = std.A[:, std.basis]
    xb = np.linalg.solve(B, std.b)
    e = np.zeros(std.A.shape[0])
    e[pos] = std.row_flip[pos]
    g = np.linalg.solve(B, e)
    decrease = math.inf
    increase = math.inf
    for k in range(len(g)):
        if g[k] > PIVOT_TOL:
            decrease = min(decrease, max(float(xb[k]), 0.0) / float(g[k]))
        elif g[k] < -PIVOT_TOL:
            increase = min(increase, max(float(xb[k]), 0.0) / -float(g[k]))
    return RhsRange(row=row, decrease=decrease, increase=increase)


def feasibility_residuals(lp: LinearProgram, x: np.ndarray) -> np.ndarray:
    """Signed violation per row (positive means violated)."""
    lhs = lp.A @ x
    out = np.zeros(lp.num_rows)
    for i, rel in enumerate(lp.relations):
        if rel == LESS:
            out[i] = lhs[i] - lp.b[i]
        elif rel == GREATER:
            out[i] = lp.b[i] - lhs[i]
        else:
            out[i] = abs(lhs[i] - lp.b[i])
    return out


def complementary_slackness_residuals(lp: LinearProgram, sol: LpSolution):
    """|slack * dual| per row and |reduced cost * (value - active bound)| per variable."""
    lhs = lp.A @ sol.x
    row_res = np.abs((lhs - lp.b) * sol.duals)
    lo, up = lp._bound_arrays()
    var_res = np.zeros(lp.num_vars)
    for j in range(lp.num_vars):
        gaps = []
        if lp.domains[j] == NONNEG or not np.isnan(lo[j]):
            base = lo[j] if not np.isnan(lo[j]) else 0.0
            gaps.append(abs(sol.x[j] - base))
        if not np.isnan(up[j]):
            gaps.append(abs(sol.x[j] - up[j]))
        if gaps:
            var_res[j] = abs(sol.reduced_costs[j] * min(gaps))
        else:
            var_res[j] = abs(sol.reduced_costs[j])  # free: reduced cost vanishes
    return row_res, var_res


def enumerate_vertices(lp: LinearProgram, max_vars: int = 12, max_bases: int = 200000):
    """Exhaustive basic-feasible-solution oracle for small programs.

    Returns a list of ``(x, objective)`` pairs, one per basic feasible
    solution of the equality standard form (mapped back to the original
    variables).  Independent cross-check of :func:`solve`: on a feasible
    bounded program the optimum must match the best enumerated objective.
    """
    if lp.num_vars > max_vars:
        raise OracleSizeError(f"{lp.num_vars} variables exceeds the oracle cap of {max_vars}")
    std = _build_standard_form(lp)
    A = std.A[:, ~std.artificial]
    col_var = [cv for cv, art in zip(std.col_var, std.artificial) if not art]
    m, n = A.shape
    if math.comb(n, m) > max_bases:
        raise OracleSizeError(f"{math.comb(n, m)} candidate bases exceed the enumeration cap")
    seen = set()
    out = []
    for cols in itertools.combinations(range(n), m):
        Bc = A[:, cols]
        try:
            xb = np.linalg.solve(Bc, std.b)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(xb)) or np.any(xb < -1e-9):
            continue
        x = np.zeros(lp.num_vars)
        for k, col in enumerate(cols):
            if col_var[col] is not None:
                j, sgn = col_var[col]
                x[j] += sgn * xb[k]
        if np.any(feasibility_residuals(lp, x) > 1e-7):
            continue
        key = tuple(np.round(x, 9))
        if key in seen:
            continue
        seen.add(key)
        out.append((x, float(lp.c @ x)))
    return out


def solve_lexicographic(lp: LinearProgram, stages) -> LpSolution:
    """Optimize a chain of secondary objectives over the optimal face of ``lp``.

    ``stages`` is a sequence of ``(cost, sense)`` pairs.  Each stage pins the
    previously achieved objective with an equality row and optimizes the next
    cost over the remaining face.  A stage whose refinement fails to solve
    (e.g. an unbounded secondary direction) is skipped.  The result carries
    the refined primal point with the primary objective; the stage-one duals
    (a valid optimal dual for ``lp``) are passed through.  Used to select a
    canonical optimum when the optimal face is degenerate.
    """
    first = solve(lp)
    if first.status != OPTIMAL:
        return first
    cur_lp, cur = lp, first
    prev_c, prev_val = lp.c, first.objective
    for c2, sense2 in stages:
        candidate = LinearProgram(
            sense=sense2,
            c=np.asarray(c2, dtype=float),
            A=np.vstack([cur_lp.A, prev_c[None, :]]),
            relations=cur_lp.relations + (EQUAL,),
            b=np.append(cur_lp.b, prev_val),
            domains=cur_lp.domains,
            lower=cur_lp.lower,
            upper=cur_lp.upper,
        )
        refined = solve(candidate)
        if refined.status != OPTIMAL:
            continue
        cur_lp, cur = candidate, refined
        prev_c, prev_val = candidate.c, refined.objective
    return LpSolution(
        status=OPTIMAL,
        objective=float(lp.c @ cur.x),
        x=cur.x,
        duals=first.duals,
        reduced_costs=first.reduced_costs,
        basis=cur.basis,
        dual_objective=first.dual_objective,
        _std=None,
    )
