"""HTTP JSON API for the review workflow, plus static hosting of the UI bundle.

All /api routes sit behind a static bearer token. Mutating endpoints honor an
Idempotency-Key header: a repeated key replays the stored response. Errors are
uniform: {"error": {"code", "message"}}.
"""

import json
import threading
from pathlib import Path
from typing import Optional

import uvicorn
from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import pipeline, providers, rubric
from .catalog import ControlTypeId, catalog_as_dicts
from .errors import DomainError
from .resources import Catalog
from .retrieval import Index
from .store import (
    GenerationRecord,
    RecordStatus,
    RecordStore,
    record_to_dict,
    rubric_to_dict,
)
from .gherkin import serialize

_STATUS_CODES = {
    "NotFound": 404,
    "WrongState": 409,
    "UnknownResource": 404,
}

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>controls review</title></head>
<body><h1>controls review service</h1>
<p>No UI bundle is configured. The JSON API lives under /api.</p>
</body></html>
"""


def _error_response(code: str, message: str, status: int) -> JSONResponse:
    return JSONResponse({"error": {"code": code, "message": message}}, status_code=status)


def record_summary(record: GenerationRecord) -> dict:
    return {
        "id": record.id,
        "service": record.service,
        "resource": record.resource,
        "control_type": record.control_type.value,
        "status": record.status.value,
        "created_at": record.created_at.isoformat(),
        "updated_at": record.updated_at.isoformat(),
        "prescreen": {
            name: record.rubric.get(name).value for name in ("s1", "s2", "s3", "s4")
        },
        "score": record.score,
        "findings_count": len(record.findings),
    }


def record_detail(record: GenerationRecord) -> dict:
    doc = record_to_dict(record)
    doc["gherkin_text"] = serialize(record.control) if record.control else None
    return doc


def create_app(
    store: RecordStore,
    catalog: Catalog,
    auth_token: str,
    *,
    provider: Optional[providers.LlmProvider] = None,
    index: Optional[Index] = None,
    ui_dir: Optional[str] = None,
    scenario_bounds: tuple = rubric.DEFAULT_SCENARIO_BOUNDS,
) -> FastAPI:
    app = FastAPI(title="controls review service", docs_url=None, redoc_url=None)
    idempotency_cache: dict = {}
    idempotency_lock = threading.Lock()

    @app.middleware("http")
    async def auth_and_idempotency(request: Request, call_next):
        path = request.url.path
        if path.startswith("/api"):
            header = request.headers.get("authorization", "")
            if header != f"Bearer {auth_token}":
                return _error_response("Unauthorized", "missing or invalid bearer token", 401)
            key = request.headers.get("idempotency-key")
            if request.method == "POST" and key:
                cache_key = (path, key)
                with idempotency_lock:
                    cached = idempotency_cache.get(cache_key)
                if cached is not None:
                    status, body = cached
                    return JSONResponse(body, status_code=status)
                response = await call_next(request)
                chunks = [chunk async for chunk in response.body_iterator]
                body_bytes = b"".join(chunks)
                try:
                    parsed = json.loads(body_bytes)
                except ValueError:
                    parsed = None
                if parsed is not None:
                    with idempotency_lock:
                        idempotency_cache[cache_key] = (response.status_code, parsed)
                return JSONResponse(parsed, status_code=response.status_code)
        return await call_next(request)

    @app.exception_handler(DomainError)
    async def domain_error_handler(_request: Request, exc: DomainError):
        code = type(exc).__name__
        return _error_response(code, str(exc), _STATUS_CODES.get(code, 400))

    @app.get("/api/control-types")
    async def control_types():
        return {"control_types": catalog_as_dicts()}

    @app.get("/api/records")
    async def list_records(
        status: Optional[str] = None,
        control_type: Optional[str] = None,
        service: Optional[str] = None,
    ):
        status_filter = None
        if status is not None:
            try:
                status_filter = RecordStatus(status)
            except ValueError:
                return _error_response("InvalidStatus", f"unknown status {status!r}", 400)
        type_filter = ControlTypeId.from_text(control_type) if control_type else None
        records = store.list_records(
            status=status_filter, control_type=type_filter, service=service
        )
        return [record_summary(r) for r in records]

    @app.get("/api/records/{record_id}")
    async def get_record(record_id: str):
        return record_detail(store.get(record_id))

    @app.post("/api/records/{record_id}/review")
    async def review_record(record_id: str, request: Request):
        payload = await request.json()
        if not isinstance(payload, dict):
            return _error_response("InvalidBody", "review body must be a JSON object", 400)
        reviewer = str(payload.pop("reviewer", "anonymous"))
        decision = payload.pop("decision", None)
        needs_revision = decision == RecordStatus.NEEDS_REVISION.value
        updated = store.record_review(
            record_id, payload, reviewer=reviewer, needs_revision=needs_revision
        )
        return {
            "id": updated.id,
            "score": updated.score,
            "status": updated.status.value,
            "rubric": rubric_to_dict(updated.rubric),
        }

    @app.post("/api/score")
    async def score_rubric(request: Request):
        payload = await request.json()
        if not isinstance(payload, dict):
            return _error_response("InvalidBody", "score body must be a JSON object", 400)
        applied = rubric.apply_human_review(rubric.RubricScore.all_unset(), payload)
        fs = rubric.final_score(applied)
        return {"score": fs.value, "accepted": fs.accepted}

    @app.post("/api/generate")
    async def generate_record(request: Request):
        if provider is None or index is None:
            return _error_response(
                "ProviderUnavailable", "service started without a provider/index", 400
            )
        payload = await request.json()
        try:
            service_name = payload["service"]
            resource_name = payload["resource"]
            type_id = ControlTypeId.from_text(payload["control_type"])
        except (KeyError, TypeError):
            return _error_response(
                "InvalidBody", "body needs service, resource, control_type", 400
            )
        record = pipeline.generate(
            catalog,
            index,
            provider,
            store,
            service_name,
            resource_name,
            type_id,
            force=bool(payload.get("force", False)),
            scenario_bounds=scenario_bounds,
        )
        return record_detail(record)

    @app.get("/api/reports/summary")
    async def report_summary():
        return summary_rows(store)

    @app.get("/api/reports/histogram")
    async def report_histogram(bin_width: float = 0.5):
        bins = rubric.histogram(completed_scores(store), bin_width)
        return {
            "bin_width": bin_width,
            "bins": [{"start": start, "count": count} for start, count in bins],
            "total": sum(count for _, count in bins),
        }

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        async def root():
            return _FALLBACK_PAGE

    return app


COMPLETED_STATUSES = (RecordStatus.ACCEPTED, RecordStatus.REJECTED, RecordStatus.NEEDS_REVISION)


def completed_records(store: RecordStore) -> list[GenerationRecord]:
    return [r for r in store.list_records() if r.status in COMPLETED_STATUSES]


def completed_scores(store: RecordStore) -> list[float]:
    return [r.score for r in completed_records(store) if r.score is not None]


def summary_rows(store: RecordStore) -> list[dict]:
    """Per-control-type aggregate rows over completed reviews, catalog order."""
    completed = completed_records(store)
    rows = []
    for type_id in ControlTypeId:
        rubrics = [r.rubric for r in completed if r.control_type is type_id]
        if not rubrics:
            continue
        report = rubric.aggregate(rubrics)
        rows.append(
            {
                "control_type": type_id.value,
                "count": report.count,
                "mean_scenario_sum": report.mean_scenario_sum,
                "mean_rule_avg": report.mean_rule_avg,
                "table_final": report.table_final,
                "mean_item_final": report.mean_item_final,
            }
        )
    return rows


def serve(
    store: RecordStore,
    catalog: Catalog,
    *,
    auth_token: str,
    host: str = "127.0.0.1",
    port: int = 8080,
    provider: Optional[providers.LlmProvider] = None,
    index: Optional[Index] = None,
    ui_dir: Optional[str] = None,
) -> None:
    app = create_app(
        store, catalog, auth_token, provider=provider, index=index, ui_dir=ui_dir
    )
    uvicorn.run(app, host=host, port=port, log_level="info")
