"""HTTP API for the operator UI: datasets, jobs, reports, exports.

Single-operator deployment: every endpoint except GET /healthz requires
the static token in the X-API-Token header. Uploaded datasets and
finished reports persist on disk under a content-addressed artifacts
directory; the in-memory job index is rebuilt from disk at startup, so
restarts keep finished work and mark interrupted jobs failed. Jobs of
the same kind execute one at a time in submission order, and a job is
only marked done after its report file is fully written, so a `done`
answer always has a readable report behind it.
"""
from __future__ import annotations

import hashlib
import json
import os
import queue
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from .carbon import fleet_report, load_fleet
from .cli import SCHEMAS, RunConfig, sweep_from_bundle, train_bundle
from .data import ScalingParams, ingest_csv, scale, split
from .errors import PlantOptError, ValidationError
from .evaluate import QUANTILE_LEVELS
from .explain import contribution_percentages
from .gbt import model_from_dict
from .stats import correlation_matrix, ecdf, kde

SERVICE_SCHEMA_VERSION = 1
JOB_KINDS = ("train", "sweep", "carbon")
_TRANSITIONS = {
    "queued": {"running", "failed"},
    "running": {"done", "failed"},
    "done": set(),
    "failed": set(),
}


@dataclass
class Job:
    """One unit of queued work and its lifecycle state."""

    id: str
    kind: str
    params: dict = field(default_factory=dict)
    state: str = "queued"
    progress: float = 0.0
    result: str | None = None
    error: str | None = None

    def __post_init__(self):
        if self.kind not in JOB_KINDS:
            raise ValidationError(f"unknown job kind {self.kind!r}")
        if self.state not in _TRANSITIONS:
            raise ValidationError(f"unknown job state {self.state!r}")

    def to_dict(self) -> dict:
        return {
            "schema_version": SERVICE_SCHEMA_VERSION,
            "id": self.id,
            "kind": self.kind,
            "state": self.state,
            "progress": self.progress,
            "result": self.result,
            "error": self.error,
            "params": self.params,
        }


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


class JobStore:
    """Disk-backed job index; every mutation persists before returning."""

    def __init__(self, root: Path):
        self.root = root
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._jobs: dict[str, Job] = {}
        for path in sorted(self.root.glob("*.json")):
            doc = json.loads(path.read_text())
            job = Job(
                id=doc["id"],
                kind=doc["kind"],
                params=doc.get("params", {}),
                state=doc["state"],
                progress=doc.get("progress", 0.0),
                result=doc.get("result"),
                error=doc.get("error"),
            )
            if job.state in ("queued", "running"):
                job.state = "failed"
                job.error = "interrupted by service restart"
                self._persist(job)
            self._jobs[job.id] = job

    def _persist(self, job: Job) -> None:
        _atomic_write(self.root / f"{job.id}.json", json.dumps(job.to_dict(), sort_keys=True))

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            job = self._jobs.get(job_id)
            return None if job is None else replace(job)

    def create(self, job: Job) -> tuple[Job, bool]:
        """Insert a job, or return the existing one with the same id."""
        with self._lock:
            existing = self._jobs.get(job.id)
            if existing is not None:
                return replace(existing), False
            self._jobs[job.id] = job
            self._persist(job)
            return replace(job), True

    def update(self, job_id: str, *, state=None, progress=None, result=None, error=None) -> Job:
        with self._lock:
            job = self._jobs[job_id]
            if state is not None and state != job.state:
                if state not in _TRANSITIONS[job.state]:
                    raise RuntimeError(f"illegal transition {job.state} -> {state}")
                job.state = state
            if progress is not None:
                job.progress = float(progress)
            if result is not None:
                job.result = result
            if error is not None:
                job.error = error
            if job.state == "done" and job.result is None:
                raise RuntimeError("a done job must carry a result reference")
            self._persist(job)
            return replace(job)


def _canonical_job_id(kind: str, params: dict) -> str:
    blob = f"{kind}:{json.dumps(params, sort_keys=True)}"
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _summary_variables(table) -> list:
    means = table.values.mean(axis=0)
    lows = table.values.min(axis=0)
    highs = table.values.max(axis=0)
    return [
        {
            "name": var.name,
            "unit": var.unit,
            "role": var.role,
            "minimum": float(lows[i]),
            "maximum": float(highs[i]),
            "mean": float(means[i]),
        }
        for i, var in enumerate(table.schema.variables)
    ]


def create_app(token: str, artifacts_dir: str | Path) -> FastAPI:
    """Build the service with its artifact store rooted at artifacts_dir."""
    if not token:
        raise ValidationError("service token must be nonempty")
    root = Path(artifacts_dir)
    datasets_dir = root / "datasets"
    train_reports = root / "reports" / "train"
    sweep_reports = root / "reports" / "sweep"
    for directory in (datasets_dir, train_reports, sweep_reports):
        directory.mkdir(parents=True, exist_ok=True)
    store = JobStore(root / "jobs")
    queues: dict = {"train": queue.Queue(), "sweep": queue.Queue()}

    app = FastAPI(title="plantopt service")

    @app.middleware("http")
    async def require_token(request: Request, call_next):
        if request.url.path != "/healthz" and request.headers.get("X-API-Token") != token:
            return JSONResponse({"detail": "invalid or missing API token"}, status_code=401)
        return await call_next(request)

    # Added last so it wraps the token check: browser preflight requests
    # carry no custom headers and must be answered before auth runs.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["X-API-Token", "Content-Type"],
    )

    # --------------------------------------------------------- datasets

    def _dataset_meta_path(dataset_id: str) -> Path:
        return datasets_dir / f"{dataset_id}.meta.json"

    def _load_dataset_bytes(dataset_id: str) -> tuple[bytes, dict]:
        csv_path = datasets_dir / f"{dataset_id}.csv"
        meta_path = _dataset_meta_path(dataset_id)
        if not csv_path.exists() or not meta_path.exists():
            raise HTTPException(404, f"unknown dataset {dataset_id}")
        raw = csv_path.read_bytes()
        if hashlib.sha256(raw).hexdigest() != dataset_id:
            raise HTTPException(500, "dataset store corrupted: content hash mismatch")
        return raw, json.loads(meta_path.read_text())

    def _table_for(dataset_id: str):
        raw, meta = _load_dataset_bytes(dataset_id)
        return ingest_csv(raw, SCHEMAS[meta["schema"]]()), meta

    @app.post("/datasets")
    async def upload_dataset(request: Request, schema: str = "plant"):
        if schema not in SCHEMAS:
            raise HTTPException(400, f"unknown schema {schema!r}")
        raw = await request.body()
        if not raw:
            raise HTTPException(400, "empty request body; send CSV bytes")
        try:
            table = ingest_csv(raw, SCHEMAS[schema]())
        except PlantOptError as exc:
            raise HTTPException(400, str(exc)) from exc
        dataset_id = hashlib.sha256(raw).hexdigest()
        meta = {
            "schema_version": SERVICE_SCHEMA_VERSION,
            "dataset_id": dataset_id,
            "schema": schema,
            "n_rows": table.n_rows,
            "variables": _summary_variables(table),
        }
        csv_path = datasets_dir / f"{dataset_id}.csv"
        if not csv_path.exists():
            tmp = csv_path.with_name(csv_path.name + ".tmp")
            tmp.write_bytes(raw)
            os.replace(tmp, csv_path)
        _atomic_write(_dataset_meta_path(dataset_id), json.dumps(meta, sort_keys=True))
        return meta

    @app.get("/datasets/{dataset_id}/stats")
    def dataset_stats(dataset_id: str):
        table, meta = _table_for(dataset_id)
        report = correlation_matrix(table)
        distributions = {}
        for name in table.schema.names:
            column = table.column(name)
            entry = {"ecdf": ecdf(column).to_dict(), "kde": None}
            try:
                entry["kde"] = kde(column).to_dict()
            except PlantOptError:
                pass
            distributions[name] = entry
        return {
            "schema_version": SERVICE_SCHEMA_VERSION,
            "dataset_id": dataset_id,
            "n_rows": meta["n_rows"],
            "correlation": report.to_dict(),
            "distributions": distributions,
        }

    # ------------------------------------------------------------- jobs

    def _submit(kind: str, params: dict) -> dict:
        job, created = store.create(Job(id=_canonical_job_id(kind, params), kind=kind, params=params))
        if created:
            queues[kind].put(job.id)
        return job.to_dict()

    def _get_body(doc, key, default):
        value = doc.get(key, default)
        return default if value is None else value

    @app.post("/jobs/train")
    async def submit_train(request: Request):
        doc = await request.json()
        dataset_id = doc.get("dataset_id")
        if not dataset_id:
            raise HTTPException(400, "dataset_id is required")
        _load_dataset_bytes(dataset_id)
        params = {
            "dataset_id": dataset_id,
            "seed": int(_get_body(doc, "seed", 0)),
            "alpha": float(_get_body(doc, "alpha", 0.05)),
            "tuning_budget": int(_get_body(doc, "tuning_budget", 0)),
            "train_fraction": float(_get_body(doc, "train_fraction", 0.64)),
            "calibration_fraction": float(_get_body(doc, "calibration_fraction", 0.16)),
            "hyperparams": _get_body(doc, "hyperparams", {}),
        }
        try:
            _train_config(params).validate()
        except PlantOptError as exc:
            raise HTTPException(400, str(exc)) from exc
        return _submit("train", params)

    @app.post("/jobs/sweep")
    async def submit_sweep(request: Request):
        doc = await request.json()
        train_job_id = doc.get("train_job")
        if not train_job_id:
            raise HTTPException(400, "train_job is required")
        train_job = store.get(train_job_id)
        if train_job is None or train_job.kind != "train":
            raise HTTPException(404, f"unknown train job {train_job_id}")
        if train_job.state == "failed":
            raise HTTPException(500, train_job.error or "train job failed")
        if train_job.state != "done":
            raise HTTPException(409, f"train job {train_job_id} is not done yet")
        params = {
            "train_job": train_job_id,
            "tau_list": list(_get_body(doc, "tau_list", list(RunConfig().taus))),
            "bounds": _get_body(doc, "bounds", {}),
            "quantiles": list(_get_body(doc, "quantiles", list(QUANTILE_LEVELS))),
            "chain": doc.get("chain"),
            "n_guesses": int(_get_body(doc, "n_guesses", 219)),
            "guess_seed": int(_get_body(doc, "guess_seed", 1)),
            "weights": list(_get_body(doc, "weights", [1.0, 1.0])),
            "solver": _get_body(doc, "solver", dict(RunConfig().solver)),
            "jobs": int(_get_body(doc, "jobs", 1)),
        }
        try:
            _sweep_config(params).validate()
        except PlantOptError as exc:
            raise HTTPException(400, str(exc)) from exc
        return _submit("sweep", params)

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = store.get(job_id)
        if job is None:
            raise HTTPException(404, f"unknown job {job_id}")
        return job.to_dict()

    # ---------------------------------------------------------- reports

    def _finished_job(job_id: str, kind: str) -> Job:
        job = store.get(job_id)
        if job is None or job.kind != kind:
            raise HTTPException(404, f"unknown {kind} job {job_id}")
        if job.state == "failed":
            raise HTTPException(500, job.error or f"{kind} job failed")
        if job.state != "done":
            raise HTTPException(409, f"job {job_id} is not done yet")
        return job

    @app.get("/reports/train/{job_id}")
    def get_train_report(job_id: str):
        """Training summary with the bulky model blobs stripped out."""
        _finished_job(job_id, "train")
        bundle = json.loads((train_reports / f"{job_id}.json").read_text())
        doc = {k: v for k, v in bundle.items() if k != "targets"}
        doc["targets"] = {
            name: {k: v for k, v in target.items() if k not in ("model", "calibration")}
            for name, target in bundle["targets"].items()
        }
        return doc

    @app.get("/reports/sweep/{job_id}")
    def get_sweep_report(job_id: str):
        _finished_job(job_id, "sweep")
        return json.loads((sweep_reports / f"{job_id}.json").read_text())

    @app.get("/reports/shap/{model}")
    def get_shap_report(model: str, job: str):
        if model not in ("TE", "THR"):
            raise HTTPException(400, "model must be TE or THR")
        _finished_job(job, "train")
        bundle = json.loads((train_reports / f"{job}.json").read_text())
        table, _ = _table_for(bundle["dataset_id"])
        splits = split(
            table,
            bundle["fractions"]["train"],
            bundle["fractions"]["calibration"],
            bundle["seed"],
        )
        x_test = scale(
            table.operating_matrix(), ScalingParams.from_dict(bundle["scaler"])
        )[splits.test_indices]
        ranking = contribution_percentages(model_from_dict(bundle["targets"][model]["model"]), x_test)
        return {
            "schema_version": SERVICE_SCHEMA_VERSION,
            "target": model,
            "train_job": job,
            "evaluation_split": "test",
            "contributions": [
                {"feature": name, "percent": float(percent)} for name, percent in ranking
            ],
        }

    @app.post("/export/setpoints")
    async def export_setpoints(request: Request):
        doc = await request.json()
        job_id = doc.get("job")
        if not job_id:
            raise HTTPException(400, "job is required")
        _finished_job(job_id, "sweep")
        report_doc = json.loads((sweep_reports / f"{job_id}.json").read_text())
        tau = doc.get("tau")
        entry = None
        if tau is None:
            entry = report_doc["unconstrained"]
        else:
            for candidate in report_doc["entries"]:
                if candidate["tau"] == float(tau):
                    entry = candidate
                    break
        if entry is None:
            raise HTTPException(400, f"tau {tau} is not part of this sweep")
        if entry["quantiles"] is None:
            raise HTTPException(500, "entry has no solutions to export")
        levels = entry["quantiles"]["levels"]
        quantile = doc.get("quantile")
        if quantile not in levels:
            raise HTTPException(400, f"quantile must be one of {levels}")
        pick = entry["quantiles"]["picks"][levels.index(quantile)]
        if pick.get("x_engineering") is None:
            raise HTTPException(500, "report carries no engineering-unit setpoints")
        names = report_doc["feature_names"]
        units = report_doc["feature_units"]
        lines = ["variable,unit,value"]
        for name, unit, value in zip(names, units, pick["x_engineering"]):
            lines.append(f"{name},{unit},{value:.10g}")
        return Response(content="\n".join(lines) + "\n", media_type="text/csv")

    @app.get("/carbon")
    def carbon_report(delta_pp: float | None = None):
        fleet = load_fleet()
        delta = fleet.delta_pp_reference if delta_pp is None else delta_pp
        try:
            report = fleet_report(fleet.plants, delta)
        except PlantOptError as exc:
            raise HTTPException(400, str(exc)) from exc
        doc = report.to_dict()
        doc["schema_version"] = SERVICE_SCHEMA_VERSION
        doc["reference_subtotals_mt"] = fleet.reference_subtotals_mt
        doc["reference_total_mt"] = fleet.reference_total_mt
        return doc

    @app.get("/healthz")
    def healthz():
        return PlainTextResponse("ok")

    # ---------------------------------------------------------- workers

    def _train_config(params: dict) -> RunConfig:
        return RunConfig(
            seed=params["seed"],
            alpha=params["alpha"],
            tuning_budget=params["tuning_budget"],
            train_fraction=params["train_fraction"],
            calibration_fraction=params["calibration_fraction"],
            hyperparams=dict(params["hyperparams"]),
        )

    def _sweep_config(params: dict) -> RunConfig:
        return RunConfig(
            taus=tuple(params["tau_list"]),
            bounds=dict(params["bounds"]),
            quantile_levels=tuple(params["quantiles"]),
            chain=None if params["chain"] is None else tuple(params["chain"]),
            n_guesses=params["n_guesses"],
            guess_seed=params["guess_seed"],
            weights=tuple(params["weights"]),
            solver=dict(params["solver"]),
            jobs=params["jobs"],
        )

    def _run_train_job(job: Job) -> str:
        raw, meta = _load_dataset_bytes(job.params["dataset_id"])
        table = ingest_csv(raw, SCHEMAS[meta["schema"]]())
        config = replace(_train_config(job.params), schema=meta["schema"])
        bundle = train_bundle(config, table)
        bundle["dataset_id"] = job.params["dataset_id"]
        _atomic_write(
            train_reports / f"{job.id}.json", json.dumps(bundle, sort_keys=True)
        )
        return f"/reports/train/{job.id}"

    def _run_sweep_job(job: Job) -> str:
        train_job = store.get(job.params["train_job"])
        if train_job is None or train_job.state != "done":
            raise ValidationError("train job disappeared or is no longer done")
        bundle = json.loads((train_reports / f"{train_job.id}.json").read_text())
        raw, meta = _load_dataset_bytes(bundle["dataset_id"])
        table = ingest_csv(raw, SCHEMAS[meta["schema"]]())
        config = replace(_sweep_config(job.params), schema=meta["schema"])
        report = sweep_from_bundle(config, bundle, table)
        doc = report.to_dict()
        doc["train_job"] = train_job.id
        doc["dataset_id"] = bundle["dataset_id"]
        doc["feature_names"] = list(bundle["feature_names"])
        schema = SCHEMAS[meta["schema"]]()
        unit_of = {v.name: v.unit for v in schema.variables}
        doc["feature_units"] = [unit_of[name] for name in bundle["feature_names"]]
        _atomic_write(sweep_reports / f"{job.id}.json", json.dumps(doc, sort_keys=True))
        return f"/reports/sweep/{job.id}"

    handlers = {"train": _run_train_job, "sweep": _run_sweep_job}

    def worker(kind: str) -> None:
        while True:
            job_id = queues[kind].get()
            if job_id is None:
                return
            job = store.get(job_id)
            if job is None or job.state != "queued":
                continue
            store.update(job_id, state="running", progress=0.1)
            try:
                result = handlers[kind](store.get(job_id))
                store.update(job_id, state="done", progress=1.0, result=result)
            except HTTPException as exc:
                store.update(job_id, state="failed", error=str(exc.detail))
            except Exception as exc:
                store.update(job_id, state="failed", error=str(exc))

    for kind in queues:
        thread = threading.Thread(target=worker, args=(kind,), daemon=True, name=f"plantopt-{kind}")
        thread.start()

    app.state.artifacts_root = root
    app.state.job_store = store
    return app
