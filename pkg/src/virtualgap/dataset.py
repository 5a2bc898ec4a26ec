"""Decision-matrix ingestion, validation and canonical serialization.

A decision matrix holds strictly positive observed volumes for every unit
under comparison: an inputs block X (one row per input criterion, one column
per unit) and an outputs block Y (one row per output criterion).  Units of
measure are opaque annotation strings carried through to reports; the
analysis itself is unit-free.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field

import numpy as np

SIZE_RULE_FACTOR = 2          # advisory rule: units >= 2 * (inputs + outputs)
MAGNITUDE_RATIO_LIMIT = 1e6


class DatasetError(Exception):
    """Base class for ingestion errors."""


class ParseError(DatasetError):
    """Malformed input text; carries line/column context when available."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class PositivityError(DatasetError):
    """An observed volume is zero or negative."""


class DuplicateLabelError(DatasetError):
    """A unit or criterion label appears twice on the same axis."""


@dataclass(frozen=True, eq=False)
class DecisionMatrix:
    """Observed volumes for ``n`` units over ``m`` inputs and ``s`` outputs.

    ``X`` is (m, n) and ``Y`` is (s, n); every entry must be strictly
    positive and labels must be unique per axis.  Instances are immutable
    and safe to share across threads.
    """

    dmus: tuple
    inputs: tuple          # (label, unit) pairs
    outputs: tuple         # (label, unit) pairs
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dmus", tuple(self.dmus))
        object.__setattr__(self, "inputs", tuple((str(a), str(b)) for a, b in self.inputs))
        object.__setattr__(self, "outputs", tuple((str(a), str(b)) for a, b in self.outputs))
        object.__setattr__(self, "X", np.asarray(self.X, dtype=float))
        object.__setattr__(self, "Y", np.asarray(self.Y, dtype=float))
        self._check()

    def _check(self):
        n, m, s = self.num_dmus, self.num_inputs, self.num_outputs
        if n < 2:
            raise DatasetError(f"need at least 2 units, got {n}")
        if m < 1 or s < 1:
            raise DatasetError("need at least one input and one output")
        if self.X.shape != (m, n):
            raise DatasetError(f"X has shape {self.X.shape}, expected {(m, n)}")
        if self.Y.shape != (s, n):
            raise DatasetError(f"Y has shape {self.Y.shape}, expected {(s, n)}")
        for axis, labels in (("dmu", self.dmus),
                             ("input", [l for l, _ in self.inputs]),
                             ("output", [l for l, _ in self.outputs])):
            if len(set(labels)) != len(labels):
                dup = sorted({l for l in labels if list(labels).count(l) > 1})[0]
                raise DuplicateLabelError(f"duplicate {axis} label {dup!r}")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.Y))):
            raise DatasetError("matrix contains non-finite entries")
        if np.any(self.X <= 0) or np.any(self.Y <= 0):
            raise PositivityError("all observed volumes must be strictly positive")

    @property
    def num_dmus(self) -> int:
        return len(self.dmus)

    @property
    def num_inputs(self) -> int:
        return len(self.inputs)

    @property
    def num_outputs(self) -> int:
        return len(self.outputs)

    def index_of(self, dmu: str) -> int:
        try:
            return self.dmus.index(dmu)
        except ValueError:
            raise DatasetError(f"unknown dmu label {dmu!r}") from None

    def column(self, j: int):
        return self.X[:, j], self.Y[:, j]

    def replace_column(self, dmu: str, x_col, y_col) -> "DecisionMatrix":
        j = self.index_of(dmu)
        X = self.X.copy()
        Y = self.Y.copy()
        X[:, j] = x_col
        Y[:, j] = y_col
        return DecisionMatrix(self.dmus, self.inputs, self.outputs, X, Y)

    def drop(self, dmu: str) -> "DecisionMatrix":
        j = self.index_of(dmu)
        keep = [k for k in range(self.num_dmus) if k != j]
        return DecisionMatrix(
            tuple(self.dmus[k] for k in keep), self.inputs, self.outputs,
            self.X[:, keep], self.Y[:, keep],
        )

    def to_json_dict(self) -> dict:
        return {
            "dmus": list(self.dmus),
            "inputs": [{"label": l, "unit": u} for l, u in self.inputs],
            "outputs": [{"label": l, "unit": u} for l, u in self.outputs],
            "X": [[float(v) for v in row] for row in self.X],
            "Y": [[float(v) for v in row] for row in self.Y],
        }

    def content_hash(self) -> str:
        payload = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class ValidationReport:
    """Fatal errors, advisory warnings and per-criterion magnitude summary."""

    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    magnitude_summary: list = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return not self.errors

    def to_json_dict(self) -> dict:
        return {
            "errors": list(self.errors),
            "warnings": list(self.warnings),
            "magnitude_summary": list(self.magnitude_summary),
            "accepted": self.accepted,
        }


def _parse_header_field(raw: str, position: int):
    raw = raw.strip()
    for prefix in ("in:", "out:"):
        if raw.startswith(prefix):
            body = raw[len(prefix):]
            if body.endswith("]") and "[" in body:
                label, unit = body[:-1].split("[", 1)
            else:
                label, unit = body, ""
            if not label:
                raise ParseError("empty criterion label in header", line=1, column=position)
            return prefix[:-1], label, unit
    raise ParseError(f"header field {raw!r} must start with 'in:' or 'out:'", line=1, column=position)


def parse_csv(text: str) -> DecisionMatrix:
    """Parse the CSV wire format.

    Header: ``dmu,in:<label>[unit],...,out:<label>[unit],...``; one row per
    unit; decimal point, no thousands separators; UTF-8.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file", line=1) from None
    if not header or header[0].strip() != "dmu":
        raise ParseError("first header field must be 'dmu'", line=1, column=1)
    inputs, outputs = [], []
    kinds = []
    for pos, fieldtext in enumerate(header[1:], start=2):
        kind, label, unit = _parse_header_field(fieldtext, pos)
        kinds.append(kind)
        (inputs if kind == "in" else outputs).append((label, unit))
    if any(k == "in" for k in kinds) and kinds != sorted(kinds, key=lambda k: 0 if k == "in" else 1):
        raise ParseError("all 'in:' columns must precede 'out:' columns", line=1)

    dmus, rows = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise ParseError(
                f"expected {len(header)} fields, found {len(row)}", line=lineno)
        dmus.append(row[0].strip())
        values = []
        for col, cell in enumerate(row[1:], start=2):
            try:
                values.append(float(cell))
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", line=lineno, column=col) from None
        rows.append(values)
    m = len(inputs)
    data = np.asarray(rows, dtype=float).T if rows else np.zeros((m + len(outputs), 0))
    return DecisionMatrix(tuple(dmus), tuple(inputs), tuple(outputs), data[:m], data[m:])


def parse_json(text: str) -> DecisionMatrix:
    """Parse the JSON wire format (X row-major by input, Y by output)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc.msg), line=exc.lineno, column=exc.colno) from None
    try:
        return DecisionMatrix(
            tuple(doc["dmus"]),
            tuple((c["label"], c.get("unit", "")) for c in doc["inputs"]),
            tuple((c["label"], c.get("unit", "")) for c in doc["outputs"]),
            np.asarray(doc["X"], dtype=float),
            np.asarray(doc["Y"], dtype=float),
        )
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed dataset document: {exc}") from None


def parse(text: str, format: str = "csv") -> DecisionMatrix:
    if format == "csv":
        return parse_csv(text)
    if format == "json":
        return parse_json(text)
    raise ParseError(f"unknown format {format!r}")


def serialize(matrix: DecisionMatrix, format: str = "json") -> str:
    """Canonical text form; ``parse(serialize(m)) == m`` field for field."""
    if format == "json":
        return json.dumps(matrix.to_json_dict(), indent=2) + "\n"
    if format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(
            ["dmu"]
            + [f"in:{l}[{u}]" for l, u in matrix.inputs]
            + [f"out:{l}[{u}]" for l, u in matrix.outputs]
        )
        for j, dmu in enumerate(matrix.dmus):
            writer.writerow(
                [dmu]
                + [repr(float(v)) for v in matrix.X[:, j]]
                + [repr(float(v)) for v in matrix.Y[:, j]]
            )
        return out.getvalue()
    raise ParseError(f"unknown format {format!r}")


def validate(matrix: DecisionMatrix) -> ValidationReport:
    """Advisory checks on an already-accepted matrix; never mutates it.

    The unit-count rule (n >= 2(m+s)) is a warning, not a rejection: small
    benchmark sets are routinely analysed below that threshold.
    """
    report = ValidationReport()
    n, m, s = matrix.num_dmus, matrix.num_inputs, matrix.num_outputs
    if n < SIZE_RULE_FACTOR * (m + s):
        report.warnings.append(
            f"n < 2(m+s): {n} units for {m}+{s} criteria; results may discriminate poorly"
        )
    stacked = np.vstack([matrix.X, matrix.Y])
    for j, dmu in enumerate(matrix.dmus):
        col = stacked[:, j]
        ratio = float(col.max() / col.min())
        if ratio > MAGNITUDE_RATIO_LIMIT:
            report.warnings.append(
                f"magnitude spread in column {dmu!r}: max/min = {ratio:.3g} exceeds 1e6"
            )
    labels = [f"in:{l}" for l, _ in matrix.inputs] + [f"out:{l}" for l, _ in matrix.outputs]
    for row, label in zip(stacked, labels):
        report.magnitude_summary.append(
            {"criterion": label, "min": float(row.min()), "max": float(row.max()),
             "ratio": float(row.max() / row.min())}
        )
    return report
