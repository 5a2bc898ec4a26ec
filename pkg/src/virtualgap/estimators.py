"""Estimator-style front end: fit a matrix once, read per-unit results.

The classes follow the scikit-learn contract (``fit`` returning ``self``,
``get_params``/``set_params``, fitted attributes with a trailing
underscore, array-in/array-out) without importing scikit-learn, so they
drop into pipelines and model-selection utilities that duck-type the API.
Rows are units, columns are criteria, matching the ecosystem's
``(n_samples, n_features)`` orientation; the engine's internal layout is
criteria by units.
"""

from __future__ import annotations

import numpy as np

from . import analysis, models as M, procedure
from .dataset import DecisionMatrix


class NotFittedError(RuntimeError):
    """fit() has not been called yet."""


def check_positive_2d(name: str, arr) -> np.ndarray:
    """Validate and coerce an array-like to a strictly positive 2D float array."""
    out = np.asarray(arr, dtype=float)
    if out.ndim == 1:
        out = out[:, None]
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {out.shape}")
    if out.shape[0] < 2:
        raise ValueError(f"{name} needs at least two rows (units), got {out.shape[0]}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite values")
    if np.any(out <= 0):
        raise ValueError(f"{name} must be strictly positive")
    return out


def check_consistent_rows(X: np.ndarray, Y: np.ndarray) -> None:
    if X.shape[0] != Y.shape[0]:
        raise ValueError(
            f"inputs and outputs disagree on the number of units: {X.shape[0]} vs {Y.shape[0]}"
        )


class _ParamsMixin:
    _param_names: tuple = ()

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names}

    def set_params(self, **params):
        for key, value in params.items():
            if key not in self._param_names:
                raise ValueError(f"unknown parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={getattr(self, k)!r}" for k in self._param_names)
        return f"{type(self).__name__}({args})"

    def _require_fitted(self, attr: str):
        if not hasattr(self, attr):
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")


def _build_matrix(X, Y, dmu_labels=None, input_labels=None, output_labels=None) -> DecisionMatrix:
    X = check_positive_2d("X", X)
    Y = check_positive_2d("Y", Y)
    check_consistent_rows(X, Y)
    n, m = X.shape
    s = Y.shape[1]
    dmus = tuple(dmu_labels) if dmu_labels is not None else tuple(f"dmu{j}" for j in range(n))
    ins = tuple(input_labels) if input_labels is not None else tuple(f"x{i+1}" for i in range(m))
    outs = tuple(output_labels) if output_labels is not None else tuple(f"y{r+1}" for r in range(s))
    return DecisionMatrix(
        dmus=dmus,
        inputs=tuple((l, "") if isinstance(l, str) else tuple(l) for l in ins),
        outputs=tuple((l, "") if isinstance(l, str) else tuple(l) for l in outs),
        X=X.T, Y=Y.T,
    )


class VirtualGapAnalysis(_ParamsMixin):
    """Virtual-gap efficiency scoring over a set of units.

    Parameters
    ----------
    model : "pt", "tsc", "spt" or "stsc"
        Model family.  The super-efficiency families score efficient units
        only; inefficient units get NaN there (see ``efficient_``).
    kappa : float, optional
        Intensity-sum scalar, required by the scalar families.

    Attributes (after fit)
    ----------------------
    matrix_ : DecisionMatrix
    scores_ : ndarray of shape (n_units,)
    efficient_ : boolean ndarray from the plain inefficiency pass
    reports_ : dict label -> EfficiencyReport for every scored unit
    ranking_ : RankingTable over both tiers
    """

    _param_names = ("model", "kappa")

    def __init__(self, model: str = "pt", kappa: float | None = None):
        self.model = model
        self.kappa = kappa

    def fit(self, X, Y, dmu_labels=None, input_labels=None, output_labels=None):
        kind = M.ModelKind.parse(self.model)
        if kind.has_scalar and (self.kappa is None or self.kappa <= 0):
            raise ValueError(f"model {kind.value!r} requires a positive kappa")
        matrix = _build_matrix(X, Y, dmu_labels, input_labels, output_labels)
        scores = np.full(matrix.num_dmus, np.nan)
        efficient = np.zeros(matrix.num_dmus, dtype=bool)
        reports = {}
        for j, dmu in enumerate(matrix.dmus):
            plain = M.evaluate(matrix, M.ModelKind.PT, dmu)
            efficient[j] = plain.step2.adjustment_price <= M.EFFICIENT_TOL
            if kind.is_super and not efficient[j]:
                continue
            if kind is M.ModelKind.PT:
                sol = plain
            else:
                try:
                    sol = M.evaluate(matrix, kind, dmu, kappa=self.kappa, check_efficient=False)
                except M.ModelInfeasibleError:
                    continue   # scalar out of this unit's feasible range: NaN score
            scores[j] = sol.efficiency
            reports[dmu] = analysis.report(matrix, sol)
        self.matrix_ = matrix
        self.scores_ = scores
        self.efficient_ = efficient
        self.reports_ = reports
        self.ranking_ = procedure.rank(matrix)
        return self

    def fit_predict(self, X, Y, **kwargs) -> np.ndarray:
        return self.fit(X, Y, **kwargs).scores_

    def transform(self, X=None, Y=None) -> np.ndarray:
        """Benchmark volumes of the fitted units, stacked (inputs, outputs).

        Units outside the scored set (inefficient units under a super
        family) keep their observed volumes.
        """
        self._require_fitted("matrix_")
        if X is not None or Y is not None:
            raise ValueError("transform returns benchmarks of the fitted units; fit new data instead")
        mat = self.matrix_
        out = np.hstack([mat.X.T.copy(), mat.Y.T.copy()])
        for j, dmu in enumerate(mat.dmus):
            rep = self.reports_.get(dmu)
            if rep is not None:
                out[j, :mat.num_inputs] = rep.benchmark_inputs
                out[j, mat.num_inputs:] = rep.benchmark_outputs
        return out

    def predict(self, X, Y) -> np.ndarray:
        """Plain-family efficiency of new units appended to the fitted set."""
        self._require_fitted("matrix_")
        Xn = check_positive_2d("X", X)
        Yn = check_positive_2d("Y", Y)
        check_consistent_rows(Xn, Yn)
        base = self.matrix_
        scores = np.empty(Xn.shape[0])
        for k in range(Xn.shape[0]):
            label = f"_new{k}"
            mat = DecisionMatrix(
                base.dmus + (label,), base.inputs, base.outputs,
                np.column_stack([base.X, Xn[k]]), np.column_stack([base.Y, Yn[k]]),
            )
            scores[k] = M.evaluate(mat, M.ModelKind.PT, label).efficiency
        return scores


class AdditiveEfficiency(_ParamsMixin):
    """Additive DEA baseline with the same estimator surface.

    Attributes (after fit): ``inefficiency_`` (envelopment objectives),
    ``efficient_``, ``solutions_`` (label -> AdditiveSolution).
    """

    _param_names = ("returns_to_scale", "input_weights", "output_weights")

    def __init__(self, returns_to_scale: str = "crs", input_weights=None, output_weights=None):
        self.returns_to_scale = returns_to_scale
        self.input_weights = input_weights
        self.output_weights = output_weights

    def fit(self, X, Y, dmu_labels=None, input_labels=None, output_labels=None):
        from .additive import AdditiveConfig, evaluate_additive

        matrix = _build_matrix(X, Y, dmu_labels, input_labels, output_labels)
        cfg = AdditiveConfig(
            returns_to_scale=self.returns_to_scale,
            input_weights=self.input_weights,
            output_weights=self.output_weights,
        )
        ineff = np.full(matrix.num_dmus, np.nan)
        efficient = np.zeros(matrix.num_dmus, dtype=bool)
        sols = {}
        for j, dmu in enumerate(matrix.dmus):
            sol = evaluate_additive(matrix, dmu, cfg)
            sols[dmu] = sol
            if sol.inefficiency is not None:
                ineff[j] = sol.inefficiency
                efficient[j] = bool(sol.efficient)
        self.matrix_ = matrix
        self.inefficiency_ = ineff
        self.efficient_ = efficient
        self.solutions_ = sols
        return self

    def fit_predict(self, X, Y, **kwargs) -> np.ndarray:
        return self.fit(X, Y, **kwargs).inefficiency_
