"""HTTP JSON service and static host for the web cockpit.

Endpoints (JSON over HTTP)::

    GET  /api/health
    POST /api/dataset                      body = dataset JSON, returns hash
    GET  /api/dataset/{hash}
    POST /api/evaluate                     {hash?, model, dmu, kappa?, bounds?}
    POST /api/procedure/{dmu}/phase{1|2|3} {hash?, scenario?}
    POST /api/procedure/{dmu}/try          {hash?, kappa, override?}
    POST /api/procedure/{dmu}/commit       {hash?, kappa}
    GET  /api/procedure/{dmu}?hash=
    GET  /api/plot/{dmu}?model=&kappa=&hash=
    GET  /api/rank?hash=

Errors: 400 malformed, 404 unknown hash/dmu, 409 write conflict, 422
solver-reported infeasibility.  Reads run concurrently; writes are
serialized per (dataset, unit).  Evaluations are pure, so identical
requests produce byte-identical responses (and match the CLI output).
"""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import additive, analysis, dataset, linprog, models, procedure
from .cli import render_json


class ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


class AppState:
    """Datasets, procedure sessions and their locks."""

    def __init__(self, matrix=None, session_dir=None):
        self._datasets = {}
        self._sessions = {}
        self._locks = {}
        self._registry_lock = threading.Lock()
        self.default_hash = None
        self.session_dir = Path(session_dir) if session_dir else None
        if self.session_dir:
            self.session_dir.mkdir(parents=True, exist_ok=True)
            self._load_persisted()
        if matrix is not None:
            self.default_hash = self.add_dataset(matrix)

    def _load_persisted(self):
        for path in sorted(self.session_dir.glob("dataset_*.json")):
            try:
                matrix = dataset.parse(path.read_text(encoding="utf-8"), "json")
                self._datasets[matrix.content_hash()] = matrix
            except dataset.DatasetError:
                continue
        for path in sorted(self.session_dir.glob("session_*.json")):
            try:
                state = procedure.ProcedureState.from_json(path.read_text(encoding="utf-8"))
                self._sessions[(state.dataset_hash, state.dmu)] = state
            except (procedure.ProcedureError, json.JSONDecodeError, KeyError):
                continue

    def add_dataset(self, matrix) -> str:
        digest = matrix.content_hash()
        with self._registry_lock:
            self._datasets[digest] = matrix
        if self.session_dir:
            (self.session_dir / f"dataset_{digest}.json").write_text(
                dataset.serialize(matrix, "json"), encoding="utf-8")
        return digest

    def matrix(self, digest: str | None):
        digest = digest or self.default_hash
        if digest is None or digest not in self._datasets:
            raise ApiError(404, f"unknown dataset hash {digest!r}")
        return digest, self._datasets[digest]

    def session(self, digest: str, dmu: str):
        return self._sessions.get((digest, dmu))

    def store_session(self, state) -> None:
        self._sessions[(state.dataset_hash, state.dmu)] = state
        if self.session_dir:
            name = f"session_{state.dataset_hash[:16]}_{state.dmu}.json"
            (self.session_dir / re.sub(r"[^A-Za-z0-9._-]", "_", name)).write_text(
                state.to_json(), encoding="utf-8")

    def write_lock(self, digest: str, dmu: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault((digest, dmu), threading.Lock())


def _ratio_bounds(doc):
    if not doc:
        return None
    return models.RatioBounds(
        q_lower=tuple(doc["q_lower"]) if doc.get("q_lower") else None,
        q_upper=tuple(doc["q_upper"]) if doc.get("q_upper") else None,
        p_lower=tuple(doc["p_lower"]) if doc.get("p_lower") else None,
        p_upper=tuple(doc["p_upper"]) if doc.get("p_upper") else None,
    )


def evaluation_document(matrix, model, dmu, kappa=None, bounds=None) -> dict:
    sol = models.evaluate(matrix, model, dmu, kappa=kappa, bounds=bounds)
    doc = analysis.report(matrix, sol).to_json_dict()
    if not models.ModelKind.parse(model).has_scalar:
        doc["kappa1"] = models.first_scalar(sol)
    return doc


class Handler(BaseHTTPRequestHandler):
    app: AppState = None
    ui_dir: Path | None = None
    server_version = "virtualgap"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    # -- plumbing ---------------------------------------------------------
    def _send(self, status: int, payload, content_type="application/json"):
        body = payload if isinstance(payload, bytes) else render_json(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            doc = json.loads(raw.decode("utf-8") or "{}")
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise ApiError(400, f"malformed JSON body: {exc}")
        if not isinstance(doc, dict):
            raise ApiError(400, "request body must be a JSON object")
        return doc

    def _guard(self, fn):
        try:
            fn()
        except ApiError as exc:
            self._send(exc.status, {"error": exc.message})
        except (models.NotEfficientError, models.ModelInfeasibleError) as exc:
            self._send(422, {"error": str(exc)})
        except (procedure.OutOfIntervalError, procedure.UntriedScalarError,
                procedure.PhaseOrderError, models.ScalarError, models.ModelError,
                dataset.DatasetError, additive.AdditiveError, ValueError) as exc:
            self._send(400, {"error": str(exc)})
        except (linprog.LinearProgramError, procedure.ProcedureError) as exc:
            self._send(422, {"error": str(exc)})

    # -- routes -----------------------------------------------------------
    def do_GET(self):
        self._guard(self._route_get)

    def do_POST(self):
        self._guard(self._route_post)

    def _route_get(self):
        url = urlparse(self.path)
        query = {k: v[0] for k, v in parse_qs(url.query).items()}
        parts = [p for p in url.path.split("/") if p]
        if url.path == "/api/health":
            self._send(200, {"status": "ok"})
        elif len(parts) == 3 and parts[:2] == ["api", "dataset"]:
            _, matrix = self.app.matrix(parts[2])
            self._send(200, matrix.to_json_dict())
        elif len(parts) == 3 and parts[:2] == ["api", "procedure"]:
            digest, _ = self.app.matrix(query.get("hash"))
            state = self.app.session(digest, parts[2])
            if state is None:
                raise ApiError(404, f"no session for {parts[2]!r}")
            self._send(200, state.to_json_dict())
        elif len(parts) == 3 and parts[:2] == ["api", "plot"]:
            _, matrix = self.app.matrix(query.get("hash"))
            if parts[2] not in matrix.dmus:
                raise ApiError(404, f"unknown dmu {parts[2]!r}")
            model = query.get("model", "pt")
            kappa = float(query["kappa"]) if "kappa" in query else None
            sol = models.evaluate(matrix, model, parts[2], kappa=kappa)
            self._send(200, analysis.plot_geometry(matrix, sol).to_json_dict())
        elif url.path == "/api/rank":
            _, matrix = self.app.matrix(query.get("hash"))
            self._send(200, procedure.rank(matrix).to_json_dict())
        elif url.path.startswith("/api/"):
            raise ApiError(404, f"no such endpoint {url.path}")
        else:
            self._static(url.path)

    def _route_post(self):
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        if url.path == "/api/dataset":
            doc = self._body()
            try:
                matrix = dataset.DecisionMatrix(
                    tuple(doc["dmus"]),
                    tuple((c["label"], c.get("unit", "")) for c in doc["inputs"]),
                    tuple((c["label"], c.get("unit", "")) for c in doc["outputs"]),
                    doc["X"], doc["Y"],
                )
            except (KeyError, TypeError) as exc:
                raise ApiError(400, f"malformed dataset document: {exc}")
            digest = self.app.add_dataset(matrix)
            self._send(200, {"hash": digest})
        elif url.path == "/api/evaluate":
            doc = self._body()
            _, matrix = self.app.matrix(doc.get("hash"))
            if "model" not in doc or "dmu" not in doc:
                raise ApiError(400, "evaluate needs 'model' and 'dmu'")
            if doc["dmu"] not in matrix.dmus:
                raise ApiError(404, f"unknown dmu {doc['dmu']!r}")
            out = evaluation_document(
                matrix, doc["model"], doc["dmu"],
                kappa=doc.get("kappa"), bounds=_ratio_bounds(doc.get("bounds")))
            self._send(200, out)
        elif len(parts) == 4 and parts[:2] == ["api", "procedure"]:
            self._procedure_post(parts[2], parts[3])
        else:
            raise ApiError(404, f"no such endpoint {url.path}")

    def _procedure_post(self, dmu: str, action: str):
        doc = self._body()
        digest, matrix = self.app.matrix(doc.get("hash"))
        if dmu not in matrix.dmus:
            raise ApiError(404, f"unknown dmu {dmu!r}")
        lock = self.app.write_lock(digest, dmu)
        if not lock.acquire(blocking=False):
            raise ApiError(409, f"a write for {dmu!r} is already in progress")
        try:
            state = self.app.session(digest, dmu)
            if action == "phase1":
                state = procedure.phase1(matrix, dmu, doc.get("scenario", procedure.INEFFICIENCY))
            elif action in ("phase2", "phase3"):
                if state is None:
                    raise ApiError(404, f"no session for {dmu!r}; run phase1 first")
                if action == "phase2":
                    procedure.phase2(state, matrix)
                else:
                    if state.phase < 2:
                        procedure.phase2(state, matrix)
                    procedure.phase3(state, matrix)
            elif action == "try":
                if state is None:
                    raise ApiError(404, f"no session for {dmu!r}; run phase1 first")
                if "kappa" not in doc:
                    raise ApiError(400, "try needs 'kappa'")
                procedure.phase4_try(state, matrix, float(doc["kappa"]),
                                     override=bool(doc.get("override")))
            elif action == "commit":
                if state is None:
                    raise ApiError(404, f"no session for {dmu!r}; run phase1 first")
                if "kappa" not in doc:
                    raise ApiError(400, "commit needs 'kappa'")
                procedure.phase4_commit(state, float(doc["kappa"]))
            else:
                raise ApiError(404, f"no such procedure action {action!r}")
            self.app.store_session(state)
            self._send(200, state.to_json_dict())
        finally:
            lock.release()

    # -- static cockpit ----------------------------------------------------
    _CONTENT_TYPES = {
        ".html": "text/html; charset=utf-8",
        ".js": "text/javascript; charset=utf-8",
        ".css": "text/css; charset=utf-8",
        ".svg": "image/svg+xml",
        ".json": "application/json",
        ".map": "application/json",
    }

    def _static(self, path: str):
        if self.ui_dir is None:
            raise ApiError(404, "no web bundle configured (start with --ui-dir)")
        rel = path.lstrip("/") or "index.html"
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            if (self.ui_dir / "index.html").is_file() and "." not in rel:
                target = self.ui_dir / "index.html"   # SPA fallback
            else:
                raise ApiError(404, f"not found: {path}")
        ctype = self._CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), content_type=ctype)


def make_server(host="127.0.0.1", port=0, matrix=None, session_dir=None, ui_dir=None):
    app = AppState(matrix=matrix, session_dir=session_dir)
    handler = type("BoundHandler", (Handler,), {
        "app": app,
        "ui_dir": Path(ui_dir) if ui_dir else _default_ui_dir(),
    })
    return ThreadingHTTPServer((host, port), handler)


def _default_ui_dir():
    packaged = Path(__file__).parent / "webui"
    if packaged.is_dir():
        return packaged
    local = Path.cwd() / "frontend" / "dist"
    if local.is_dir():
        return local
    return None


def serve(host="127.0.0.1", port=8080, matrix=None, session_dir=None, ui_dir=None):
    httpd = make_server(host=host, port=port, matrix=matrix,
                        session_dir=session_dir, ui_dir=ui_dir)
    digest = httpd.RequestHandlerClass.app.default_hash
    print(f"serving on http://{host}:{port}" + (f" (dataset {digest[:12]})" if digest else ""))
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
