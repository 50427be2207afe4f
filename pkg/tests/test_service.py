"""Tests for the HTTP service."""
import hashlib
import time
from types import SimpleNamespace

import pytest
from fastapi.testclient import TestClient

from plantopt.errors import ValidationError
from plantopt.service import Job, JobStore, SERVICE_SCHEMA_VERSION, create_app
from plantopt.synthetic import make_cluster_table

AUTH = {"X-API-Token": "secret"}

TRAIN_BODY = {
    "seed": 0,
    "hyperparams": {"n_estimators": 50, "max_depth": 3, "eta": 0.15},
}

SWEEP_BODY = {
    "tau_list": [0.1, 0.3],
    "n_guesses": 6,
    "guess_seed": 1,
    "solver": {"rho_beg": 0.1, "rho_end": 1e-3, "maxfun": 80},
    "jobs": 2,
}


def cluster_csv_bytes(n_rows=300, seed=0):
    table = make_cluster_table(n_rows, seed=seed)
    lines = [",".join(table.schema.names)]
    for row in table.values:
        lines.append(",".join(f"{v:.12g}" for v in row))
    return ("\n".join(lines) + "\n").encode()


def wait_for(client, job_id, timeout=300.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        doc = client.get(f"/jobs/{job_id}", headers=AUTH).json()
        if doc["state"] in ("done", "failed"):
            return doc
        time.sleep(0.2)
    raise AssertionError(f"job {job_id} did not settle within {timeout}s")


@pytest.fixture(scope="module")
def service(tmp_path_factory):
    """App with one dataset uploaded and train plus sweep jobs finished."""
    artifacts = tmp_path_factory.mktemp("service") / "artifacts"
    app = create_app(token="secret", artifacts_dir=artifacts)
    client = TestClient(app)
    csv = cluster_csv_bytes()
    dataset = client.post("/datasets?schema=cluster", content=csv, headers=AUTH).json()
    submitted = client.post(
        "/jobs/train", json={"dataset_id": dataset["dataset_id"], **TRAIN_BODY}, headers=AUTH
    )
    assert submitted.status_code == 200
    train = wait_for(client, submitted.json()["id"])
    assert train["state"] == "done", train["error"]
    submitted = client.post(
        "/jobs/sweep", json={"train_job": train["id"], **SWEEP_BODY}, headers=AUTH
    )
    assert submitted.status_code == 200
    sweep = wait_for(client, submitted.json()["id"])
    assert sweep["state"] == "done", sweep["error"]
    return SimpleNamespace(
        app=app,
        client=client,
        artifacts=artifacts,
        csv=csv,
        dataset=dataset,
        train=train,
        sweep=sweep,
    )


class TestAuth:
    def test_healthz_needs_no_token(self, service):
        response = service.client.get("/healthz")
        assert response.status_code == 200
        assert response.text == "ok"

    def test_missing_token_rejected(self, service):
        response = service.client.get("/carbon")
        assert response.status_code == 401
        assert "token" in response.json()["detail"]

    def test_wrong_token_rejected(self, service):
        response = service.client.get("/carbon", headers={"X-API-Token": "nope"})
        assert response.status_code == 401

    def test_correct_token_accepted(self, service):
        assert service.client.get("/carbon", headers=AUTH).status_code == 200

    def test_cors_preflight_bypasses_auth(self, service):
        response = service.client.options(
            "/jobs/sweep",
            headers={
                "Origin": "http://localhost:8080",
                "Access-Control-Request-Method": "POST",
                "Access-Control-Request-Headers": "X-API-Token, Content-Type",
            },
        )
        assert response.status_code == 200
        assert response.headers["access-control-allow-origin"] == "*"
        allowed = response.headers["access-control-allow-headers"].lower()
        assert "x-api-token" in allowed


class TestDatasets:
    def test_id_is_content_hash(self, service):
        assert service.dataset["dataset_id"] == hashlib.sha256(service.csv).hexdigest()
        assert service.dataset["n_rows"] == 300
        assert service.dataset["schema"] == "cluster"

    def test_reupload_is_idempotent(self, service):
        again = service.client.post(
            "/datasets?schema=cluster", content=service.csv, headers=AUTH
        )
        assert again.status_code == 200
        assert again.json() == service.dataset

    def test_empty_body_rejected(self, service):
        response = service.client.post("/datasets?schema=cluster", content=b"", headers=AUTH)
        assert response.status_code == 400

    def test_unknown_schema_rejected(self, service):
        response = service.client.post(
            "/datasets?schema=mystery", content=service.csv, headers=AUTH
        )
        assert response.status_code == 400

    def test_malformed_csv_rejected(self, service):
        response = service.client.post(
            "/datasets?schema=cluster", content=b"A,B\n1,2\n", headers=AUTH
        )
        assert response.status_code == 400

    def test_stats_payload(self, service):
        doc = service.client.get(
            f"/datasets/{service.dataset['dataset_id']}/stats", headers=AUTH
        ).json()
        assert doc["n_rows"] == 300
        names = [v["name"] for v in service.dataset["variables"]]
        assert doc["correlation"]["names"] == names
        assert len(doc["correlation"]["matrix"]) == len(names)
        for name in names:
            entry = doc["distributions"][name]
            assert len(entry["ecdf"]["values"]) == len(entry["ecdf"]["probabilities"]) == 300
            assert entry["kde"] is not None
            assert len(entry["kde"]["grid"]) == len(entry["kde"]["density"])

    def test_stats_unknown_dataset(self, service):
        assert service.client.get("/datasets/feed/stats", headers=AUTH).status_code == 404

    def test_corrupted_dataset_detected(self, service):
        raw = cluster_csv_bytes(n_rows=40, seed=7)
        dataset_id = service.client.post(
            "/datasets?schema=cluster", content=raw, headers=AUTH
        ).json()["dataset_id"]
        stored = service.artifacts / "datasets" / f"{dataset_id}.csv"
        stored.write_bytes(raw + b"tampered\n")
        response = service.client.get(f"/datasets/{dataset_id}/stats", headers=AUTH)
        assert response.status_code == 500
        assert "hash" in response.json()["detail"]


class TestJobs:
    def test_job_document_shape(self, service):
        doc = service.train
        assert doc["schema_version"] == SERVICE_SCHEMA_VERSION
        assert doc["kind"] == "train"
        assert doc["state"] == "done"
        assert doc["progress"] == 1.0
        assert doc["error"] is None
        assert doc["result"] == f"/reports/train/{doc['id']}"
        assert doc["params"]["dataset_id"] == service.dataset["dataset_id"]

    def test_resubmission_returns_same_job(self, service):
        again = service.client.post(
            "/jobs/train",
            json={"dataset_id": service.dataset["dataset_id"], **TRAIN_BODY},
            headers=AUTH,
        ).json()
        assert again["id"] == service.train["id"]
        assert again["state"] == "done"

    def test_train_unknown_dataset(self, service):
        response = service.client.post(
            "/jobs/train", json={"dataset_id": "abc123", **TRAIN_BODY}, headers=AUTH
        )
        assert response.status_code == 404

    def test_train_invalid_params(self, service):
        response = service.client.post(
            "/jobs/train",
            json={"dataset_id": service.dataset["dataset_id"], "alpha": 2.0},
            headers=AUTH,
        )
        assert response.status_code == 400

    def test_unknown_job(self, service):
        assert service.client.get("/jobs/0000ffff", headers=AUTH).status_code == 404

    def test_sweep_requires_train_job(self, service):
        response = service.client.post("/jobs/sweep", json={}, headers=AUTH)
        assert response.status_code == 400

    def test_sweep_unknown_train_job(self, service):
        response = service.client.post(
            "/jobs/sweep", json={"train_job": "deadbeef"}, headers=AUTH
        )
        assert response.status_code == 404

    def test_sweep_against_unfinished_train_job(self, service):
        store = service.app.state.job_store
        store.create(Job(id="a" * 16, kind="train", params={"note": "never queued"}))
        response = service.client.post(
            "/jobs/sweep", json={"train_job": "a" * 16}, headers=AUTH
        )
        assert response.status_code == 409

    def test_sweep_against_failed_train_job(self, service):
        store = service.app.state.job_store
        store.create(Job(id="b" * 16, kind="train", state="failed", error="boom"))
        response = service.client.post(
            "/jobs/sweep", json={"train_job": "b" * 16}, headers=AUTH
        )
        assert response.status_code == 500
        assert response.json()["detail"] == "boom"

    def test_sweep_invalid_params(self, service):
        response = service.client.post(
            "/jobs/sweep",
            json={"train_job": service.train["id"], "tau_list": [0.1, 0.1]},
            headers=AUTH,
        )
        assert response.status_code == 400


class TestReports:
    def test_train_report_drops_model_blobs(self, service):
        doc = service.client.get(
            f"/reports/train/{service.train['id']}", headers=AUTH
        ).json()
        assert doc["dataset_id"] == service.dataset["dataset_id"]
        assert doc["feature_names"] == ["A", "B", "C", "D", "E", "F"]
        for target in ("TE", "THR"):
            body = doc["targets"][target]
            assert "model" not in body
            assert "calibration" not in body
            assert body["metrics"]["train"]["r2"] > 0.5

    def test_sweep_report_contents(self, service):
        doc = service.client.get(
            f"/reports/sweep/{service.sweep['id']}", headers=AUTH
        ).json()
        assert doc["taus"] == [0.1, 0.3]
        assert set(doc["baseline"]) == {"A|B", "B|C"}
        assert len(doc["entries"]) == 2
        assert doc["train_job"] == service.train["id"]
        assert doc["dataset_id"] == service.dataset["dataset_id"]
        assert doc["feature_names"] == ["A", "B", "C", "D", "E", "F"]
        assert len(doc["feature_units"]) == 6
        for entry in doc["entries"]:
            assert set(entry["cvm_by_pair"]) == {"A|B", "B|C"}

    def test_sweep_report_unknown_job(self, service):
        assert service.client.get("/reports/sweep/feedbead", headers=AUTH).status_code == 404

    def test_sweep_report_kind_mismatch(self, service):
        response = service.client.get(
            f"/reports/sweep/{service.train['id']}", headers=AUTH
        )
        assert response.status_code == 404

    def test_report_for_queued_job_conflicts(self, service):
        store = service.app.state.job_store
        store.create(Job(id="c" * 16, kind="sweep", params={"note": "never queued"}))
        response = service.client.get(f"/reports/sweep/{'c' * 16}", headers=AUTH)
        assert response.status_code == 409

    def test_report_for_failed_job_is_500(self, service):
        store = service.app.state.job_store
        store.create(Job(id="d" * 16, kind="sweep", state="failed", error="went sideways"))
        response = service.client.get(f"/reports/sweep/{'d' * 16}", headers=AUTH)
        assert response.status_code == 500
        assert response.json()["detail"] == "went sideways"

    def test_shap_report(self, service):
        doc = service.client.get(
            f"/reports/shap/TE?job={service.train['id']}", headers=AUTH
        ).json()
        assert doc["target"] == "TE"
        assert doc["evaluation_split"] == "test"
        percents = [row["percent"] for row in doc["contributions"]]
        assert len(percents) == 6
        assert sum(percents) == pytest.approx(100.0, abs=1e-6)
        assert percents == sorted(percents, reverse=True)

    def test_shap_rejects_unknown_model(self, service):
        response = service.client.get(
            f"/reports/shap/NOPE?job={service.train['id']}", headers=AUTH
        )
        assert response.status_code == 400

    def test_shap_kind_mismatch(self, service):
        response = service.client.get(
            f"/reports/shap/TE?job={service.sweep['id']}", headers=AUTH
        )
        assert response.status_code == 404


class TestExport:
    def test_export_matches_report(self, service):
        report = service.client.get(
            f"/reports/sweep/{service.sweep['id']}", headers=AUTH
        ).json()
        entry = next(e for e in report["entries"] if e["tau"] == 0.1)
        levels = entry["quantiles"]["levels"]
        pick = entry["quantiles"]["picks"][levels.index(95)]
        response = service.client.post(
            "/export/setpoints",
            json={"job": service.sweep["id"], "tau": 0.1, "quantile": 95},
            headers=AUTH,
        )
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/csv")
        lines = response.text.strip().split("\n")
        assert lines[0] == "variable,unit,value"
        assert len(lines) == 1 + 6
        for line, name, expected in zip(lines[1:], report["feature_names"], pick["x_engineering"]):
            variable, _, value = line.split(",")
            assert variable == name
            assert float(value) == pytest.approx(expected, rel=1e-9)

    def test_export_unconstrained_when_tau_omitted(self, service):
        response = service.client.post(
            "/export/setpoints",
            json={"job": service.sweep["id"], "quantile": 50},
            headers=AUTH,
        )
        assert response.status_code == 200
        assert len(response.text.strip().split("\n")) == 7

    def test_export_rejects_unknown_tau(self, service):
        response = service.client.post(
            "/export/setpoints",
            json={"job": service.sweep["id"], "tau": 0.77, "quantile": 50},
            headers=AUTH,
        )
        assert response.status_code == 400

    def test_export_rejects_unknown_quantile(self, service):
        response = service.client.post(
            "/export/setpoints",
            json={"job": service.sweep["id"], "tau": 0.1, "quantile": 17},
            headers=AUTH,
        )
        assert response.status_code == 400

    def test_export_unknown_job(self, service):
        response = service.client.post(
            "/export/setpoints", json={"job": "feedface", "quantile": 50}, headers=AUTH
        )
        assert response.status_code == 404


class TestCarbon:
    def test_default_delta(self, service):
        doc = service.client.get("/carbon", headers=AUTH).json()
        assert doc["schema_version"] == SERVICE_SCHEMA_VERSION
        assert doc["delta_pp"] == 0.64
        assert sum(doc["subtotals"].values()) == pytest.approx(doc["total"])
        assert doc["reference_total_mt"] == 156.4

    def test_zero_delta(self, service):
        doc = service.client.get("/carbon?delta_pp=0", headers=AUTH).json()
        assert doc["total"] == 0.0

    def test_negative_delta_rejected(self, service):
        assert service.client.get("/carbon?delta_pp=-1", headers=AUTH).status_code == 400


class TestRestart:
    def test_interrupted_jobs_marked_failed(self, tmp_path):
        jobs_dir = tmp_path / "jobs"
        seed_store = JobStore(jobs_dir)
        seed_store.create(Job(id="1" * 16, kind="train", state="queued"))
        running = Job(id="2" * 16, kind="sweep")
        seed_store.create(running)
        seed_store.update(running.id, state="running", progress=0.4)
        seed_store.create(
            Job(id="3" * 16, kind="train", state="done", result="/reports/train/x", progress=1.0)
        )
        app = create_app(token="secret", artifacts_dir=tmp_path)
        client = TestClient(app)
        for job_id in ("1" * 16, "2" * 16):
            doc = client.get(f"/jobs/{job_id}", headers=AUTH).json()
            assert doc["state"] == "failed"
            assert doc["error"] == "interrupted by service restart"
        done = client.get(f"/jobs/{'3' * 16}", headers=AUTH).json()
        assert done["state"] == "done"
        assert done["result"] == "/reports/train/x"

    def test_restart_still_serves_finished_reports(self, service):
        app = create_app(token="secret", artifacts_dir=service.artifacts)
        client = TestClient(app)
        doc = client.get(f"/reports/sweep/{service.sweep['id']}", headers=AUTH).json()
        assert doc["train_job"] == service.train["id"]
        assert len(doc["entries"]) == 2


class TestJobStore:
    def test_illegal_transition_rejected(self, tmp_path):
        store = JobStore(tmp_path)
        store.create(Job(id="e" * 16, kind="train", state="done", result="r", progress=1.0))
        with pytest.raises(RuntimeError, match="illegal transition"):
            store.update("e" * 16, state="running")

    def test_done_requires_result(self, tmp_path):
        store = JobStore(tmp_path)
        store.create(Job(id="f" * 16, kind="train"))
        store.update("f" * 16, state="running")
        with pytest.raises(RuntimeError, match="result"):
            store.update("f" * 16, state="done")

    def test_duplicate_create_returns_existing(self, tmp_path):
        store = JobStore(tmp_path)
        first, created = store.create(Job(id="9" * 16, kind="train", params={"a": 1}))
        second, again = store.create(Job(id="9" * 16, kind="train", params={"a": 2}))
        assert created and not again
        assert second.params == {"a": 1}

    def test_job_validation(self):
        with pytest.raises(ValidationError, match="kind"):
            Job(id="x", kind="bake")
        with pytest.raises(ValidationError, match="state"):
            Job(id="x", kind="train", state="paused")
