"""Virtual-gap efficiency analysis and multi-criteria ranking engine.

Core pieces:

* :mod:`virtualgap.linprog` - self-contained simplex with duals and ranging
* :mod:`virtualgap.dataset` - decision-matrix ingestion and validation
* :mod:`virtualgap.models` - the four virtual-gap model families
* :mod:`virtualgap.analysis` - scores, benchmarks, virtual-scale geometry
* :mod:`virtualgap.procedure` - four-phase scalar selection, ranking, sessions
* :mod:`virtualgap.additive` - additive DEA baseline for comparison
* :mod:`virtualgap.estimators` - scikit-learn style fit/transform front end
"""

from .dataset import DecisionMatrix, ValidationReport, parse, serialize, validate
from .estimators import AdditiveEfficiency, VirtualGapAnalysis
from .models import ModelKind, ModelSolution, RatioBounds, evaluate, first_scalar
from .analysis import EfficiencyReport, plot_geometry, report, reevaluate_at_benchmark
from .procedure import ProcedureState, rank, run_phases

__version__ = "0.1.0"

__all__ = [
    "AdditiveEfficiency",
    "DecisionMatrix",
    "EfficiencyReport",
    "ModelKind",
    "ModelSolution",
    "ProcedureState",
    "RatioBounds",
    "ValidationReport",
    "VirtualGapAnalysis",
    "evaluate",
    "first_scalar",
    "parse",
    "plot_geometry",
    "rank",
    "reevaluate_at_benchmark",
    "report",
    "run_phases",
    "serialize",
    "validate",
]
