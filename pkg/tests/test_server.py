import json
import threading
import urllib.error
import urllib.request

import pytest

from virtualgap import cli, server
from virtualgap.server import evaluation_document


@pytest.fixture(scope="module")
def service(example6, tmp_path_factory):
    sess_dir = tmp_path_factory.mktemp("sessions")
    httpd = server.make_server(port=0, matrix=example6, session_dir=str(sess_dir))
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    yield base, httpd
    httpd.shutdown()
    httpd.server_close()


def get(base, path):
    try:
        with urllib.request.urlopen(base + path) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as err:
        return err.code, err.read()


def post(base, path, doc):
    req = urllib.request.Request(
        base + path, data=json.dumps(doc).encode(), method="POST",
        headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, resp.read()
    except urllib.error.HTTPError as err:
        return err.code, err.read()


def jget(base, path):
    status, body = get(base, path)
    return status, json.loads(body)


def jpost(base, path, doc):
    status, body = post(base, path, doc)
    return status, json.loads(body)


class TestBasics:
    def test_health(self, service):
        status, doc = jget(service[0], "/api/health")
        assert (status, doc) == (200, {"status": "ok"})

    def test_dataset_round_trip(self, service, example6):
        base, _ = service
        status, doc = jpost(base, "/api/dataset", example6.to_json_dict())
        assert status == 200
        digest = doc["hash"]
        assert digest == example6.content_hash()
        status, fetched = jget(base, f"/api/dataset/{digest}")
        assert status == 200
        assert fetched["dmus"] == list(example6.dmus)

    def test_unknown_hash(self, service):
        status, doc = jget(service[0], "/api/dataset/deadbeef")
        assert status == 404
        assert "error" in doc

    def test_unknown_endpoint(self, service):
        status, _ = jget(service[0], "/api/nope")
        assert status == 404

    def test_malformed_body(self, service):
        base, _ = service
        req = urllib.request.Request(
            base + "/api/evaluate", data=b"{nope", method="POST")
        with pytest.raises(urllib.error.HTTPError) as err:
            urllib.request.urlopen(req)
        assert err.value.code == 400


class TestEvaluate:
    def test_super_plain(self, service):
        status, doc = jpost(service[0], "/api/evaluate", {"model": "spt", "dmu": "B"})
        assert status == 200
        assert doc["efficiency"] == pytest.approx(2.4126, abs=2e-3)
        assert doc["kappa1"] == pytest.approx(0.2417, abs=2e-3)

    def test_missing_fields(self, service):
        status, doc = jpost(service[0], "/api/evaluate", {"model": "pt"})
        assert status == 400

    def test_infeasible_is_422(self, service):
        status, doc = jpost(service[0], "/api/evaluate",
                            {"model": "stsc", "dmu": "B", "kappa": 50.0})
        assert status == 422

    def test_not_efficient_is_422(self, service):
        status, _ = jpost(service[0], "/api/evaluate", {"model": "spt", "dmu": "K"})
        assert status == 422

    def test_matches_cli_bytes(self, service, example6):
        # the service and the CLI must produce byte-identical evaluation JSON
        status, body = post(service[0], "/api/evaluate",
                            {"model": "tsc", "dmu": "K", "kappa": 0.718})
        assert status == 200
        doc = evaluation_document(example6, "tsc", "K", kappa=0.718)
        assert body.decode("utf-8") == cli.render_json(doc)

    def test_ratio_bounds_accepted(self, service):
        status, doc = jpost(service[0], "/api/evaluate",
                            {"model": "pt", "dmu": "K",
                             "bounds": {"p_upper": [1.0, 1.0]}})
        assert status == 200
        assert max(doc["output_ratios"]) <= 1.0 + 1e-9
        status, _ = jpost(service[0], "/api/evaluate",
                          {"model": "pt", "dmu": "K",
                           "bounds": {"q_upper": [0.5]}})
        assert status == 400   # wrong bound arity is a malformed request


class TestProcedureFlow:
    def test_full_walk_and_restore(self, service, example6):
        base, httpd = service
        status, doc = jpost(base, "/api/procedure/K/phase1", {"scenario": "inefficiency"})
        assert status == 200
        assert doc["kappa1"] == pytest.approx(1.5153, abs=2e-3)
        status, doc = jpost(base, "/api/procedure/K/phase2", {})
        assert status == 200
        status, doc = jpost(base, "/api/procedure/K/phase3", {})
        assert status == 200
        assert doc["kappa2"] == pytest.approx(0.515, abs=2e-3)
        assert len(doc["phase3_endpoints"]) == 2
        status, doc = jpost(base, "/api/procedure/K/try", {"kappa": 0.718})
        assert status == 200
        assert doc["trials"][0]["report"]["efficiency"] == pytest.approx(0.589, abs=2e-3)
        status, doc = jpost(base, "/api/procedure/K/commit", {"kappa": 0.718})
        assert status == 200
        assert doc["complete"]
        status, doc = jget(base, "/api/procedure/K")
        assert status == 200
        assert doc["final_kappa"] == pytest.approx(0.718)
        assert len(doc["trials"]) == 1
        # state survives a fresh service instance reading the session dir
        app2 = server.AppState(session_dir=str(httpd.RequestHandlerClass.app.session_dir))
        restored = app2.session(example6.content_hash(), "K")
        assert restored is not None and restored.final_kappa == pytest.approx(0.718)

    def test_phase_order(self, service):
        status, doc = jpost(service[0], "/api/procedure/G/try", {"kappa": 1.0})
        assert status == 404

    def test_unknown_dmu(self, service):
        status, _ = jpost(service[0], "/api/procedure/Z/phase1", {})
        assert status == 404

    def test_write_conflict(self, service, example6):
        base, httpd = service
        app = httpd.RequestHandlerClass.app
        lock = app.write_lock(example6.content_hash(), "A")
        assert lock.acquire(blocking=False)
        try:
            status, doc = jpost(base, "/api/procedure/A/phase1", {})
            assert status == 409
        finally:
            lock.release()
        status, _ = jpost(base, "/api/procedure/A/phase1", {})
        assert status == 200

    def test_out_of_interval_try_is_400(self, service):
        base, _ = service
        jpost(base, "/api/procedure/H/phase1", {})
        jpost(base, "/api/procedure/H/phase3", {})
        status, doc = jpost(base, "/api/procedure/H/try", {"kappa": 99.0})
        assert status == 400
        status, doc = jpost(base, "/api/procedure/H/commit", {"kappa": 42.0})
        assert status == 400


class TestPlotAndRank:
    def test_plot(self, service):
        status, doc = jget(service[0], "/api/plot/K?model=tsc&kappa=0.718")
        assert status == 200
        assert doc["anchor"]["x"] == pytest.approx(0.175, abs=2e-3)
        assert len(doc["points"]) == 6

    def test_rank(self, service):
        status, doc = jget(service[0], "/api/rank")
        assert status == 200
        assert [r["dmu"] for r in doc["rows"][:2]] == ["B", "D"]


class TestStatic:
    def test_static_bundle(self, example6, tmp_path):
        ui = tmp_path / "dist"
        ui.mkdir()
        (ui / "index.html").write_text("<html><body>cockpit</body></html>")
        (ui / "app.js").write_text("console.log('ok')")
        httpd = server.make_server(port=0, matrix=example6, ui_dir=str(ui))
        thread = threading.Thread(target=httpd.serve_forever, daemon=True)
        thread.start()
        base = f"http://127.0.0.1:{httpd.server_address[1]}"
        try:
            status, body = get(base, "/")
            assert status == 200 and b"cockpit" in body
            status, body = get(base, "/app.js")
            assert status == 200 and b"console" in body
            status, _ = get(base, "/../secret")
            assert status == 404
        finally:
            httpd.shutdown()
            httpd.server_close()
