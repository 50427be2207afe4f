"""Regenerate the frozen API payloads used by the operator-ui tests.

Runs the real plantopt service in-process against a small synthetic
dataset, drives the full operator flow (upload, train, sweep, export),
and freezes every response the UI consumes into tests/fixtures/. The
UI tests replay these payloads through a scripted fetch, so they stay
honest about the exact JSON shapes the service emits.

Usage: python3 scripts/make_fixtures.py  (from frontend/, with plantopt
installed; takes about a minute because it runs a six-tau sweep)
"""
import json
import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

from plantopt.service import create_app
from plantopt.synthetic import make_cluster_table

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
AUTH = {"X-API-Token": "fixture-token"}

TRAIN_BODY = {
    "seed": 0,
    "hyperparams": {"n_estimators": 40, "max_depth": 3, "eta": 0.15},
}

SWEEP_BODY = {
    "tau_list": [0.05, 0.10, 0.15, 0.20, 0.25, 0.30],
    "n_guesses": 8,
    "guess_seed": 1,
    "solver": {"rho_beg": 0.1, "rho_end": 1e-3, "maxfun": 80},
    "jobs": 2,
}


def cluster_csv_bytes(n_rows=160, seed=0):
    table = make_cluster_table(n_rows, seed=seed)
    lines = [",".join(table.schema.names)]
    for row in table.values:
        lines.append(",".join(f"{v:.12g}" for v in row))
    return ("\n".join(lines) + "\n").encode()


def wait_for(client, job_id, timeout=600.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        doc = client.get(f"/jobs/{job_id}", headers=AUTH).json()
        if doc["state"] in ("done", "failed"):
            return doc
        time.sleep(0.2)
    raise RuntimeError(f"job {job_id} did not settle within {timeout}s")


def dump(name: str, payload) -> None:
    path = FIXTURES / name
    if isinstance(payload, (bytes, str)):
        text = payload.decode() if isinstance(payload, bytes) else payload
        path.write_text(text)
    else:
        path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
    print(f"wrote {path.relative_to(FIXTURES.parent.parent)}")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as artifacts:
        client = TestClient(create_app(token="fixture-token", artifacts_dir=artifacts))

        csv = cluster_csv_bytes()
        dump("dataset.csv", csv)
        meta = client.post("/datasets?schema=cluster", content=csv, headers=AUTH).json()
        dump("dataset_meta.json", meta)

        stats = client.get(f"/datasets/{meta['dataset_id']}/stats", headers=AUTH).json()
        dump("stats.json", stats)

        submitted = client.post(
            "/jobs/train", json={"dataset_id": meta["dataset_id"], **TRAIN_BODY}, headers=AUTH
        ).json()
        dump("train_job_queued.json", submitted)
        train = wait_for(client, submitted["id"])
        if train["state"] != "done":
            raise RuntimeError(f"train job failed: {train['error']}")
        dump("train_job_done.json", train)
        dump("train_report.json", client.get(train["result"], headers=AUTH).json())
        dump(
            "shap_te.json",
            client.get(f"/reports/shap/TE?job={train['id']}", headers=AUTH).json(),
        )

        submitted = client.post(
            "/jobs/sweep", json={"train_job": train["id"], **SWEEP_BODY}, headers=AUTH
        ).json()
        dump("sweep_job_queued.json", submitted)
        sweep = wait_for(client, submitted["id"])
        if sweep["state"] != "done":
            raise RuntimeError(f"sweep job failed: {sweep['error']}")
        dump("sweep_job_done.json", sweep)
        dump("sweep_report.json", client.get(sweep["result"], headers=AUTH).json())

        export = client.post(
            "/export/setpoints",
            json={"job": sweep["id"], "tau": 0.10, "quantile": 50},
            headers=AUTH,
        )
        dump("export_tau010_q50.csv", export.text)
        export = client.post(
            "/export/setpoints",
            json={"job": sweep["id"], "quantile": 50},
            headers=AUTH,
        )
        dump("export_unconstrained_q50.csv", export.text)


if __name__ == "__main__":
    main()
