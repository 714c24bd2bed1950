"""HTTP API: response shapes, error envelopes, and byte stability.

The explorer UI trusts these responses byte-for-byte, so beyond shape
checks the suite compares live responses against committed golden files
(tests/golden/, regenerated by tests/make_golden.py) and hammers the app
from 64 threads to prove responses never depend on request interleaving.
"""

import concurrent.futures
import json
import pathlib

import pytest
from fastapi.testclient import TestClient

from neffkit.api import create_app
from neffkit.store import load, save

GOLDEN = pathlib.Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def g_client(g_model):
    with TestClient(create_app(g_model)) as client:
        yield client


@pytest.fixture(scope="module")
def d1_client(d1_model):
    with TestClient(create_app(d1_model)) as client:
        yield client


def post_predict(client, covariates):
    return client.post("/api/v1/predict", json={"covariates": covariates})


class TestModelDocument:
    def test_two_group_metadata(self, g_client):
        doc = g_client.get("/api/v1/model").json()
        assert doc["family"] == "binomial-logit"
        assert doc["n_dev"] == 20
        assert doc["p"] == 2
        assert doc["thresholds"] == [30.0]
        (cov,) = doc["covariates"]
        assert cov["name"] == "x"
        assert cov["kind"] == "binary"
        assert cov["dev_min"] == 0.0
        assert cov["dev_max"] == 1.0
        assert cov["dev_mean"] == 0.5

    def test_gaussian_family_string(self, d1_client):
        doc = d1_client.get("/api/v1/model").json()
        assert doc["family"] == "gaussian-identity"
        assert doc["n_dev"] == 3

    def test_content_type(self, g_client):
        resp = g_client.get("/api/v1/model")
        assert resp.status_code == 200
        assert resp.headers["content-type"] == "application/json"


class TestPredict:
    def test_two_group_treated_arm(self, g_client):
        resp = post_predict(g_client, {"x": 1})
        assert resp.status_code == 200
        body = resp.json()
        assert body["yhat"] == pytest.approx(0.5, rel=1e-9)
        assert body["n_eff"] == pytest.approx(10.0, rel=1e-9)
        assert body["per_hundred"] == 50
        assert body["n_eff_display"] == "10"
        assert body["annotations"] == []
        assert 0.0 < body["dev_percentile"] <= 100.0

    def test_two_group_control_arm(self, g_client):
        body = post_predict(g_client, {"x": 0}).json()
        assert body["yhat"] == pytest.approx(0.3, rel=1e-9)
        assert body["per_hundred"] == 30
        assert body["n_eff"] == pytest.approx(10.0, rel=1e-9)

    def test_dev_row_percentile(self, d1_client):
        body = post_predict(d1_client, {"x": 1}).json()
        assert body["n_eff"] == pytest.approx(3.0, rel=1e-9)
        assert body["dev_percentile"] == 100.0
        assert body["yhat"] == pytest.approx(1.0, rel=1e-9)

    def test_extrapolation_annotation(self, d1_client):
        body = post_predict(d1_client, {"x": 4}).json()
        assert body["n_eff"] == pytest.approx(6 / 29, rel=1e-9)
        assert body["annotations"] == ["extrapolation"]

    def test_boundary_prediction_is_null_neff(self, d2_model):
        with TestClient(create_app(d2_model)) as client:
            body = post_predict(client, {"x": 50}).json()
        assert body["n_eff"] is None
        assert body["n_eff_display"] == "inf"
        assert "boundary" in body["annotations"]

    def test_binary_out_of_domain(self, g_client):
        resp = post_predict(g_client, {"x": 2})
        assert resp.status_code == 422
        body = resp.json()
        assert body["code"] == "BinaryOutOfDomain"
        assert body["field"] == "x"
        assert body["status"] == 422

    def test_unknown_covariate(self, g_client):
        resp = post_predict(g_client, {"z": 1})
        assert resp.status_code == 422
        assert resp.json()["code"] == "UnknownCovariate"
        assert resp.json()["field"] == "z"

    def test_missing_covariate(self, g_client):
        resp = post_predict(g_client, {})
        assert resp.status_code == 422
        assert resp.json()["code"] == "MissingCovariate"
        assert resp.json()["field"] == "x"

    def test_non_numeric_value(self, g_client):
        resp = post_predict(g_client, {"x": "one"})
        assert resp.status_code == 400
        assert resp.json()["code"] == "MalformedBody"
        assert resp.json()["field"] == "x"

    def test_boolean_value_rejected(self, g_client):
        assert post_predict(g_client, {"x": True}).status_code == 400

    def test_malformed_json(self, g_client):
        resp = g_client.post(
            "/api/v1/predict",
            content=b"{not json",
            headers={"content-type": "application/json"},
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "MalformedBody"

    def test_body_must_wrap_covariates(self, g_client):
        assert g_client.post("/api/v1/predict", json=[1, 2]).status_code == 400
        assert g_client.post("/api/v1/predict", json={"x": 1}).status_code == 400
        assert g_client.post("/api/v1/predict", json={"covariates": [1]}).status_code == 400

    def test_extra_top_level_keys_ignored(self, g_client):
        resp = g_client.post(
            "/api/v1/predict", json={"covariates": {"x": 1}, "client": "explorer"}
        )
        assert resp.status_code == 200


class TestErrors:
    def test_unknown_route_is_json_404(self, g_client):
        resp = g_client.get("/api/v1/nope")
        assert resp.status_code == 404
        assert resp.json()["code"] == "NotFound"

    def test_wrong_method_is_json(self, g_client):
        resp = g_client.get("/api/v1/predict")
        assert resp.status_code == 405
        assert resp.json()["status"] == 405


class TestDistribution:
    def test_two_group_mass_in_one_bin(self, g_client):
        doc = g_client.get("/api/v1/neff-distribution").json()
        assert doc["harmonic_mean"] == pytest.approx(10.0, rel=1e-9)
        assert sum(doc["histogram"]["counts"]) == 20
        assert max(doc["histogram"]["counts"]) == 20
        assert doc["boundary_count"] == 0
        assert doc["n_below"] == {"30": 20}

    def test_gaussian_harmonic_mean(self, d1_client):
        doc = d1_client.get("/api/v1/neff-distribution").json()
        assert doc["harmonic_mean"] == 1.5

    def test_quantiles_monotone(self, g_client, d1_client):
        for client in (g_client, d1_client):
            q = client.get("/api/v1/neff-distribution").json()["quantiles"]
            pcts = sorted(q, key=float)
            vals = [q[p] for p in pcts]
            assert vals == sorted(vals)


class TestByteStability:
    def test_repeated_gets_identical(self, g_client):
        first = g_client.get("/api/v1/model").content
        for _ in range(5):
            assert g_client.get("/api/v1/model").content == first
        first = g_client.get("/api/v1/neff-distribution").content
        for _ in range(5):
            assert g_client.get("/api/v1/neff-distribution").content == first

    def test_repeated_predicts_identical(self, g_client):
        first = post_predict(g_client, {"x": 1}).content
        for _ in range(5):
            assert post_predict(g_client, {"x": 1}).content == first

    def test_concurrent_storm_matches_serial(self, g_model):
        app = create_app(g_model)
        with TestClient(app) as client:
            serial = {
                "model": client.get("/api/v1/model").content,
                "dist": client.get("/api/v1/neff-distribution").content,
                "x0": post_predict(client, {"x": 0}).content,
                "x1": post_predict(client, {"x": 1}).content,
            }

        def one_request(i):
            with TestClient(app) as client:
                if i % 4 == 0:
                    return "model", client.get("/api/v1/model").content
                if i % 4 == 1:
                    return "dist", client.get("/api/v1/neff-distribution").content
                if i % 4 == 2:
                    return "x0", post_predict(client, {"x": 0}).content
                return "x1", post_predict(client, {"x": 1}).content

        with concurrent.futures.ThreadPoolExecutor(max_workers=64) as pool:
            results = list(pool.map(one_request, range(64)))
        assert len(results) == 64
        for key, content in results:
            assert content == serial[key]


@pytest.fixture(scope="module")
def golden_clients():
    clients = {}
    for name in ("g", "d1"):
        model = load(GOLDEN / f"{name}_model.json")
        clients[name] = TestClient(create_app(model))
    yield clients
    for client in clients.values():
        client.close()


class TestGoldenFixtures:
    """The committed fixtures are the UI contract; bytes must not drift."""

    CASES = [
        ("g", "GET", "/api/v1/model", None, "g_model_doc.json"),
        ("g", "GET", "/api/v1/neff-distribution", None, "g_distribution.json"),
        ("g", "POST", "/api/v1/predict", {"x": 0}, "g_predict_x0.json"),
        ("g", "POST", "/api/v1/predict", {"x": 1}, "g_predict_x1.json"),
        ("g", "POST", "/api/v1/predict", {"x": 2}, "g_predict_x2_error.json"),
        ("d1", "GET", "/api/v1/model", None, "d1_model_doc.json"),
        ("d1", "GET", "/api/v1/neff-distribution", None, "d1_distribution.json"),
        ("d1", "POST", "/api/v1/predict", {"x": 1}, "d1_predict_x1.json"),
        ("d1", "POST", "/api/v1/predict", {"x": 4}, "d1_predict_x4.json"),
    ]

    @pytest.mark.parametrize("model_name,method,path,covariates,filename",
                             CASES, ids=[c[-1] for c in CASES])
    def test_response_bytes_frozen(self, golden_clients, model_name, method,
                                   path, covariates, filename):
        client = golden_clients[model_name]
        if method == "GET":
            resp = client.get(path)
        else:
            resp = client.post(path, json={"covariates": covariates})
        expected = (GOLDEN / "api" / filename).read_bytes()
        assert resp.content == expected

    def test_golden_models_not_stale(self, g_model, d1_model, tmp_path):
        # A fresh fit must reproduce the committed model files exactly;
        # if this fails, rerun tests/make_golden.py and review the diff.
        for name, model in (("g", g_model), ("d1", d1_model)):
            save(model, tmp_path / "m.json")
            fresh = (tmp_path / "m.json").read_bytes()
            assert fresh == (GOLDEN / f"{name}_model.json").read_bytes()

    def test_golden_files_are_strict_json(self):
        for path in sorted((GOLDEN / "api").glob("*.json")):
            json.loads(path.read_text())
