"""Command-line front door.

Subcommands: validate, evaluate, procedure, rank, plot, dea, serve.
Machine-readable JSON goes to stdout by default (``--format table`` switches
to a human layout); exit codes: 0 success, 1 validation error, 2 solver
error, 64 flag errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import additive, analysis, dataset, linprog, models, procedure, svgplot

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_USAGE = 64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def render_json(obj) -> str:
    """Canonical JSON rendering shared by the CLI and the HTTP service."""
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _print_json(obj) -> None:
    sys.stdout.write(render_json(obj))


def _table_value(val):
    # human format rounds; JSON keeps full precision
    if isinstance(val, float):
        return f"{val:.6g}"
    return val


def _print_table(obj, indent: str = "") -> None:
    if isinstance(obj, dict):
        for key, val in obj.items():
            if isinstance(val, (dict, list)):
                print(f"{indent}{key}:")
                _print_table(val, indent + "  ")
            else:
                print(f"{indent}{key:<24} {_table_value(val)}")
    elif isinstance(obj, list):
        for item in obj:
            _print_table(item, indent + "  ")
            if isinstance(item, (dict, list)):
                print()
    else:
        print(f"{indent}{_table_value(obj)}")


def _emit(doc, fmt: str) -> None:
    if fmt == "table":
        _print_table(doc)
    else:
        _print_json(doc)


def _load_matrix(path: str) -> dataset.DecisionMatrix:
    text = Path(path).read_text(encoding="utf-8")
    fmt = "json" if path.endswith(".json") else "csv"
    return dataset.parse(text, fmt)


def _parse_ratio_list(raw: str | None, size: int, flag: str):
    if raw is None:
        return None
    parts = [p for p in raw.split(",") if p.strip()]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise _UsageError(f"{flag} expects comma-separated numbers, got {raw!r}") from None
    if len(values) == 1:
        values = values * size
    if len(values) != size:
        raise _UsageError(f"{flag} expects 1 or {size} values, got {len(values)}")
    return tuple(values)


def _bounds_from_args(matrix, args) -> models.RatioBounds | None:
    qmax = _parse_ratio_list(getattr(args, "qmax", None), matrix.num_inputs, "--qmax")
    pmax = _parse_ratio_list(getattr(args, "pmax", None), matrix.num_outputs, "--pmax")
    if qmax is None and pmax is None:
        return None
    return models.RatioBounds(q_upper=qmax, p_upper=pmax)


def build_parser() -> _Parser:
    parser = _Parser(prog="virtualgap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a decision matrix")
    p.add_argument("--data", required=True)
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("evaluate", help="run one model for one unit")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True, choices=("pt", "tsc", "spt", "stsc"))
    p.add_argument("--dmu", required=True)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--qmax", default=None, help="per-input ratio caps, comma separated")
    p.add_argument("--pmax", default=None, help="per-output ratio caps, comma separated")
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("procedure", help="drive the four-phase scalar selection")
    p.add_argument("--data", required=True)
    p.add_argument("--dmu", required=True)
    p.add_argument("--session", required=True, help="session JSON file (created at phase 1)")
    p.add_argument("--scenario", choices=(procedure.INEFFICIENCY, procedure.SUPER),
                   default=procedure.INEFFICIENCY)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--phase", type=int, choices=(1, 2, 3))
    group.add_argument("--try", dest="try_kappa", type=float)
    group.add_argument("--commit", dest="commit_kappa", type=float)
    p.add_argument("--override", action="store_true",
                   help="allow --try outside the phase-3 bracket")
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("rank", help="classify and rank every unit")
    p.add_argument("--data", required=True)
    p.add_argument("--scalars", default=None, help="JSON file mapping unit label to final scalar")
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("plot", help="emit the virtual-scale plane geometry")
    p.add_argument("--data", required=True)
    p.add_argument("--dmu", required=True)
    p.add_argument("--model", required=True, choices=("pt", "tsc", "spt", "stsc"))
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--svg", default=None, help="also write a standalone SVG to this path")
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("dea", help="additive baseline for one unit")
    p.add_argument("--data", required=True)
    p.add_argument("--dmu", required=True)
    p.add_argument("--rts", choices=(additive.CRS, additive.VRS), default=additive.CRS)
    p.add_argument("--weights", default=None,
                   help="JSON file {\"inputs\": [...], \"outputs\": [...]} of goal weights")
    p.add_argument("--compare", action="store_true",
                   help="also run the virtual-gap models and emit the comparison record")
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("serve", help="serve the HTTP API and the web cockpit")
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data", default=None, help="preload a dataset file")
    p.add_argument("--session-dir", default=None)
    p.add_argument("--ui-dir", default=None, help="static bundle directory")

    return parser


def _cmd_validate(args) -> int:
    try:
        matrix = _load_matrix(args.data)
    except dataset.DatasetError as exc:
        _emit({"errors": [str(exc)], "warnings": [], "magnitude_summary": [],
               "accepted": False}, args.format)
        return EXIT_VALIDATION
    report = dataset.validate(matrix)
    _emit(report.to_json_dict(), args.format)
    return EXIT_OK if report.accepted else EXIT_VALIDATION


def _cmd_evaluate(args) -> int:
    matrix = _load_matrix(args.data)
    bounds = _bounds_from_args(matrix, args)
    sol = models.evaluate(matrix, args.model, args.dmu, kappa=args.kappa, bounds=bounds)
    doc = analysis.report(matrix, sol).to_json_dict()
    if not models.ModelKind.parse(args.model).has_scalar:
        doc["kappa1"] = models.first_scalar(sol)
    _emit(doc, args.format)
    return EXIT_OK


def _cmd_procedure(args) -> int:
    matrix = _load_matrix(args.data)
    path = Path(args.session)
    state = None
    if path.exists():
        state = procedure.ProcedureState.from_json(path.read_text(encoding="utf-8"))
        if state.dataset_hash != matrix.content_hash():
            raise dataset.DatasetError("session was created for a different dataset")
        if state.dmu != args.dmu:
            raise dataset.DatasetError(
                f"session belongs to {state.dmu!r}, not {args.dmu!r}")
    if args.phase == 1 or (args.phase is not None and state is None):
        if args.phase != 1 and state is None:
            raise procedure.PhaseOrderError("run --phase 1 first to create the session")
        state = procedure.phase1(matrix, args.dmu, args.scenario)
    elif state is None:
        raise procedure.PhaseOrderError("run --phase 1 first to create the session")
    if args.phase == 2:
        procedure.phase2(state, matrix)
    elif args.phase == 3:
        if state.phase < 2:
            procedure.phase2(state, matrix)
        procedure.phase3(state, matrix)
    elif args.try_kappa is not None:
        procedure.phase4_try(state, matrix, args.try_kappa, override=args.override)
    elif args.commit_kappa is not None:
        procedure.phase4_commit(state, args.commit_kappa)
    path.write_text(state.to_json(), encoding="utf-8")
    _emit(state.to_json_dict(), args.format)
    return EXIT_OK


def _cmd_rank(args) -> int:
    matrix = _load_matrix(args.data)
    scalars = None
    if args.scalars:
        scalars = json.loads(Path(args.scalars).read_text(encoding="utf-8"))
        scalars = {str(k): float(v) for k, v in scalars.items()}
    table = procedure.rank(matrix, scalars)
    _emit(table.to_json_dict(), args.format)
    return EXIT_OK


def _cmd_plot(args) -> int:
    matrix = _load_matrix(args.data)
    sol = models.evaluate(matrix, args.model, args.dmu, kappa=args.kappa)
    geo = analysis.plot_geometry(matrix, sol).to_json_dict()
    if args.svg:
        Path(args.svg).write_text(svgplot.render_svg(geo), encoding="utf-8")
    _emit(geo, args.format)
    return EXIT_OK


def _cmd_dea(args) -> int:
    matrix = _load_matrix(args.data)
    cfg = additive.AdditiveConfig(returns_to_scale=args.rts)
    if args.weights:
        doc = json.loads(Path(args.weights).read_text(encoding="utf-8"))
        cfg = additive.AdditiveConfig(
            returns_to_scale=args.rts,
            input_weights=tuple(doc.get("inputs", [])) or None,
            output_weights=tuple(doc.get("outputs", [])) or None,
        )
    if args.compare:
        doc = additive.compare(matrix, args.dmu, cfg)
    else:
        doc = additive.evaluate_additive(matrix, args.dmu, cfg).to_json_dict()
    _emit(doc, args.format)
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .server import serve

    matrix = _load_matrix(args.data) if args.data else None
    try:
        serve(host=args.host, port=args.port, matrix=matrix,
              session_dir=args.session_dir, ui_dir=args.ui_dir)
    except OSError as exc:
        print(f"solver error: cannot bind {args.host}:{args.port}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


_COMMANDS = {
    "validate": _cmd_validate,
    "evaluate": _cmd_evaluate,
    "procedure": _cmd_procedure,
    "rank": _cmd_rank,
    "plot": _cmd_plot,
    "dea": _cmd_dea,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (dataset.DatasetError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (models.ModelError, linprog.LinearProgramError, procedure.ProcedureError,
            additive.AdditiveError, analysis.AnalysisError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
