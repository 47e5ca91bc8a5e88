"""HTTP API mirroring the dashboard's filter panel and visualization tabs.

Query endpoints are POST (a QuerySpec has too many fields for a query
string) but never mutate; only /api/v1/ingest writes, and writes are
serialized by the store. Responses are rendered with a fixed JSON
layout so an identical query against an unchanged store returns
byte-identical bytes.

Error contract: an invalid QuerySpec is a 400 with a machine-readable
violations list; a valid query that matches nothing is a 200 whose
payload says "empty": true. Users must be able to tell a failure from
a legitimately empty result.
"""
from __future__ import annotations

import json
from datetime import date
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import reports
from .breakdown import SORT_KEYS, GroupBy
from .config import ServiceConfig
from .store import (
    ChartElementRef,
    ElementError,
    QuerySpec,
    TelemetryStore,
    UnknownEngineError,
    parse_query_spec,
)

API_PREFIX = "/api/v1"


def _json_response(payload: dict, status_code: int = 200) -> Response:
    body = json.dumps(payload, separators=(",", ":"), allow_nan=False)
    return Response(content=body, media_type="application/json", status_code=status_code)


def _violations(violations: list[str], status_code: int = 400) -> Response:
    return _json_response({"error": "invalid_query", "violations": violations}, status_code)


def _parse_element(raw) -> tuple[Optional[ChartElementRef], list[str]]:
    if not isinstance(raw, dict):
        return None, ["element must be a JSON object"]
    day = raw.get("day")
    if day is not None:
        try:
            day = date.fromisoformat(day)
        except (TypeError, ValueError):
            return None, ["element.day must be a YYYY-MM-DD string"]
    try:
        element = ChartElementRef(
            engine_id=raw.get("engine_id"),
            metric=raw.get("metric"),
            day=day,
            group_by=raw.get("group_by"),
            group_key=raw.get("group_key"),
        )
    except ValueError as exc:
        return None, [str(exc)]
    return element, []


def create_app(config: ServiceConfig, store: Optional[TelemetryStore] = None) -> FastAPI:
    if store is None:
        store = TelemetryStore(config.data_dir, config.engines, config.label_policy)
    app = FastAPI(title="aitotal", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.config = config

    async def _query_from_request(request: Request):
        try:
            raw = await request.json()
        except json.JSONDecodeError:
            return None, None, _violations(["body must be valid JSON"])
        spec, errors = parse_query_spec(raw)
        if errors:
            return None, None, _violations(errors)
        return raw, spec, None

    @app.get(API_PREFIX + "/meta")
    async def meta() -> Response:
        return _json_response(reports.meta_payload(store))

    @app.post(API_PREFIX + "/query/metrics")
    async def query_metrics(request: Request) -> Response:
        _, spec, error = await _query_from_request(request)
        if error:
            return error
        try:
            return _json_response(reports.metrics_payload(store, spec, config.warn_pct))
        except UnknownEngineError as exc:
            return _violations([str(exc)])

    @app.post(API_PREFIX + "/query/quality")
    async def query_quality(request: Request) -> Response:
        _, spec, error = await _query_from_request(request)
        if error:
            return error
        try:
            payload = reports.quality_payload(
                store, spec, config.expected_sources,
                config.anomaly_window, config.anomaly_z_max)
        except UnknownEngineError as exc:
            return _violations([str(exc)])
        return _json_response(payload)

    @app.post(API_PREFIX + "/query/breakdown")
    async def query_breakdown(request: Request) -> Response:
        raw, spec, error = await _query_from_request(request)
        if error:
            return error
        group_by_raw = raw.get("group_by", "family")
        try:
            group_by = GroupBy(group_by_raw)
        except ValueError:
            return _violations([f"group_by must be one of family, filetype: {group_by_raw!r}"])
        sort_key = raw.get("sort_key", "group_key")
        if sort_key not in SORT_KEYS:
            return _violations([f"unknown sort_key: {sort_key!r}"])
        substring = raw.get("substring")
        if substring is not None and not isinstance(substring, str):
            return _violations(["substring must be a string or null"])
        descending = raw.get("descending", False)
        if not isinstance(descending, bool):
            return _violations(["descending must be a boolean"])
        try:
            payload = reports.breakdown_payload(
                store, spec, group_by, substring, sort_key, descending)
        except (UnknownEngineError, ValueError) as exc:
            return _violations([str(exc)])
        return _json_response(payload)

    @app.post(API_PREFIX + "/query/details")
    async def query_details(request: Request) -> Response:
        raw, spec, error = await _query_from_request(request)
        if error:
            return error
        element, errors = _parse_element(raw.get("element"))
        if errors:
            return _violations(errors)
        page = raw.get("page", 0)
        page_size = raw.get("page_size", 50)
        if not isinstance(page, int) or not isinstance(page_size, int) \
                or page < 0 or not 1 <= page_size <= 1000:
            return _violations(["page must be >= 0 and page_size in [1,1000]"])
        try:
            payload = reports.details_payload(store, spec, element, page, page_size)
        except (UnknownEngineError, ElementError) as exc:
            return _violations([str(exc)])
        return _json_response(payload)

    @app.post(API_PREFIX + "/query/details/export.csv")
    async def details_export(request: Request) -> Response:
        raw, spec, error = await _query_from_request(request)
        if error:
            return error
        element, errors = _parse_element(raw.get("element"))
        if errors:
            return _violations(errors)
        try:
            body = reports.details_csv(store, spec, element)
        except (UnknownEngineError, ElementError) as exc:
            return _violations([str(exc)])
        return Response(
            content=body,
            media_type="text/csv; charset=utf-8",
            headers={"Content-Disposition": 'attachment; filename="details.csv"'},
        )

    @app.post(API_PREFIX + "/ingest")
    async def ingest(request: Request) -> Response:
        body = await request.body()
        summary = store.ingest(body.decode("utf-8", errors="replace").splitlines())
        return _json_response({
            "schema": "aitotal.ingest.v1",
            "accepted": summary.accepted,
            "rejected": summary.rejected,
            "errors": summary.errors,
        })

    static_dir = config.static_dir
    if static_dir and Path(static_dir).is_dir():
        index = Path(static_dir) / "index.html"

        @app.get("/")
        async def root():
            return FileResponse(index)

        app.mount("/", StaticFiles(directory=static_dir), name="static")
    else:

        @app.get("/")
        async def root_plain():
            return JSONResponse({"service": "aitotal", "api": API_PREFIX})

    return app


def run(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.listen_host, port=config.listen_port, log_level="info")
