"""HTTP facade over the simulation pipeline.

Synchronous what-if simulation, asynchronous optimization jobs with
polling, scenario persistence, and Shapley explanations, all under
/api/v1. The OpenAPI document is served at /api/v1/spec.
"""

from __future__ import annotations

import datetime as dt
import json
import threading
import uuid

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from . import epi, nsga, shapley, strategy
from .errors import ExitsimError
from .ingest import FEATURE_NAMES
from .store import DocumentStore


class ScheduleBody(BaseModel):
    country: str
    start_date: dt.date = strategy.DEFAULT_START
    end_date: dt.date = strategy.DEFAULT_END
    period_days: int = strategy.DEFAULT_PERIOD_DAYS
    levels: list[list[float]]


class SimulateBody(BaseModel):
    country: str
    schedule: ScheduleBody
    horizon_days: int | None = None


class OptimizeBody(BaseModel):
    country: str
    population_size: int = 100
    generations: int = 100
    seed: int = 0


class ScenarioBody(BaseModel):
    name: str
    country: str
    schedule: ScheduleBody
    outcome: dict | None = None


class AppState:
    """Everything the endpoints share: country contexts, the trained
    surrogate, disease parameters, the scenario store and the job table."""

    def __init__(self, data_dir, contexts, predictor, epi_params=None):
        self.contexts = contexts
        self.predictor = predictor
        self.epi_params = epi_params or epi.EpiParams()
        self.scenarios = DocumentStore(f"{data_dir}/scenarios")
        self.fronts_dir = DocumentStore(f"{data_dir}/fronts")
        self.jobs = {}
        self.jobs_lock = threading.Lock()
        self.running_optimize = set()  # countries with an optimize in flight


def _to_schedule(body: ScheduleBody) -> strategy.PolicySchedule:
    try:
        return strategy.PolicySchedule(
            country=body.country,
            levels=np.array(body.levels, dtype=float),
            start_date=body.start_date,
            end_date=body.end_date,
            period_days=body.period_days,
        )
    except (ExitsimError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=f"schedule: {exc}") from exc


def _outcome_payload(outcome: strategy.StrategyOutcome) -> dict:
    return json.loads(outcome.to_json())


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(
        title="exitsim",
        version="0.1.0",
        openapi_url="/api/v1/spec",
    )

    def get_context(country):
        ctx = state.contexts.get(country)
        if ctx is None:
            raise HTTPException(status_code=404, detail=f"unknown country {country!r}")
        return ctx

    def require_predictor():
        if state.predictor is None:
            raise HTTPException(status_code=409, detail="no trained model loaded")
        return state.predictor

    @app.post("/api/v1/simulate")
    def simulate(body: SimulateBody):
        ctx = get_context(body.country)
        predictor = require_predictor()
        schedule = _to_schedule(body.schedule)
        outcome = strategy.simulate_schedule(schedule, ctx, predictor, state.epi_params)
        return _outcome_payload(outcome)

    @app.post("/api/v1/optimize", status_code=202)
    def optimize(body: OptimizeBody):
        ctx = get_context(body.country)
        predictor = require_predictor()
        with state.jobs_lock:
            if body.country in state.running_optimize:
                raise HTTPException(
                    status_code=409,
                    detail=f"an optimize job for {body.country} is already running",
                )
            state.running_optimize.add(body.country)
            job = {
                "id": str(uuid.uuid4()),
                "kind": "optimize",
                "status": "queued",
                "progress": 0.0,
                "result_ref": None,
                "error": None,
            }
            state.jobs[job["id"]] = job

        config = nsga.SearchConfig(
            population_size=body.population_size,
            generations=body.generations,
            seed=body.seed,
        )

        def run():
            job["status"] = "running"

            def progress(gen, total):
                job["progress"] = max(job["progress"], gen / total)

            try:
                front = nsga.optimize(ctx, predictor, state.epi_params, config, progress)
                doc = json.loads(front.to_json())
                doc["id"] = job["id"]
                doc["country"] = body.country
                state.fronts_dir.create(doc)
                job["result_ref"] = f"/api/v1/fronts/{job['id']}"
                job["progress"] = 1.0
                job["status"] = "done"
            except Exception as exc:  # report, don't crash the worker
                job["error"] = str(exc)
                job["status"] = "failed"
            finally:
                with state.jobs_lock:
                    state.running_optimize.discard(body.country)

        threading.Thread(target=run, daemon=True).start()
        return job

    @app.get("/api/v1/jobs/{job_id}")
    def get_job(job_id: str):
        job = state.jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job id")
        return job

    @app.get("/api/v1/fronts/{front_id}")
    def get_front(front_id: str):
        doc = state.fronts_dir.get(front_id)
        if doc is None:
            raise HTTPException(status_code=404, detail="unknown front id")
        return doc

    @app.post("/api/v1/scenarios", status_code=201)
    def create_scenario(body: ScenarioBody):
        _to_schedule(body.schedule)  # 400 on invariant violations
        now = dt.datetime.now(dt.timezone.utc).isoformat()
        doc = state.scenarios.create(
            {
                "name": body.name,
                "country": body.country,
                "schedule": json.loads(body.schedule.model_dump_json()),
                "outcome": body.outcome,
                "created_at": now,
                "updated_at": now,
            }
        )
        return doc

    @app.get("/api/v1/scenarios")
    def list_scenarios(
        country: str | None = None,
        limit: int = Query(default=50, ge=1),
        offset: int = Query(default=0, ge=0),
    ):
        predicate = None if country is None else (lambda d: d["country"] == country)
        items, total = state.scenarios.list(predicate, limit=limit, offset=offset)
        return {"items": items, "total": total, "limit": limit, "offset": offset}

    @app.get("/api/v1/scenarios/{scenario_id}")
    def get_scenario(scenario_id: str):
        doc = state.scenarios.get(scenario_id)
        if doc is None:
            raise HTTPException(status_code=404, detail="unknown scenario id")
        return doc

    @app.put("/api/v1/scenarios/{scenario_id}")
    def update_scenario(scenario_id: str, body: ScenarioBody):
        _to_schedule(body.schedule)
        existing = state.scenarios.get(scenario_id)
        if existing is None:
            raise HTTPException(status_code=404, detail="unknown scenario id")
        existing.update(
            {
                "name": body.name,
                "country": body.country,
                "schedule": json.loads(body.schedule.model_dump_json()),
                "outcome": body.outcome,
                "updated_at": dt.datetime.now(dt.timezone.utc).isoformat(),
            }
        )
        return state.scenarios.put(scenario_id, existing)

    @app.delete("/api/v1/scenarios/{scenario_id}", status_code=204)
    def delete_scenario(scenario_id: str):
        if not state.scenarios.delete(scenario_id):
            raise HTTPException(status_code=404, detail="unknown scenario id")

    @app.get("/api/v1/explain")
    def explain(country: str, date: dt.date, seed: int = 0, n_permutations: int = 256):
        ctx = get_context(country)
        predictor = require_predictor()
        schedule = strategy.canned_strategy("status_quo", ctx)
        features, _ = strategy.forecast_features(schedule, ctx)
        day = (date - schedule.start_date).days
        if day < 0 or day >= len(features):
            raise HTTPException(
                status_code=404, detail=f"no feature row for {country} on {date}"
            )
        background = features
        attribution = shapley.shapley_sampled(
            predictor,
            features[day],
            background,
            n_permutations=max(n_permutations, 100),
            seed=seed,
            feature_names=FEATURE_NAMES,
        )
        return json.loads(attribution.to_json())

    return app


def build_default_app(data_dir, contexts=None, predictor=None, epi_params=None) -> FastAPI:
    """App wired to the synthetic fixture contexts and a stub predictor
    unless real artifacts are supplied."""
    from . import synth

    if contexts is None:
        contexts = {code: synth.stub_context(code) for code in synth.FIXTURE_COUNTRIES}
    if predictor is None:
        predictor = synth.MonotoneStubPredictor()
    return create_app(AppState(data_dir, contexts, predictor, epi_params))
