"""Assemble the JSON payloads behind the three dashboard tabs.

Shared by the HTTP service and the CLI so `report --format json` is
byte-for-byte the HTTP metrics payload. Payloads are plain dicts built
in a fixed key order with sets sorted, which makes identical queries
against an unchanged store serialize identically.

Every payload carries an explicit "empty" marker: an empty result is a
valid answer and must stay distinguishable from a failure.
"""
from __future__ import annotations

import math
from datetime import timedelta
from typing import Optional

from . import breakdown as breakdown_mod
from . import metrics as metrics_mod
from . import quality as quality_mod
from .core import EngineKind, Label
from .store import (
    ChartElementRef,
    QuerySpec,
    TelemetryStore,
    WideRow,
    export_csv,
    query_spec_to_wire,
)

SCHEMA_PREFIX = "aitotal"


def _finite(value: Optional[float]) -> Optional[float]:
    if value is None or not math.isfinite(value):
        return None
    return value


def metrics_payload(store: TelemetryStore, spec: QuerySpec, warn_pct: float) -> dict:
    """Model Metrics tab: per-engine rates, sample ratios, series, ROC."""
    engines = store.selected_engines(spec)
    rows = store.select(spec)
    # sample ratios and the red border reflect coverage before the
    # coverage filter itself, or the slider would hide what it measures
    ratio_rows = store.select(spec, apply_coverage=False)
    per_engine = metrics_mod.compute_metrics(
        rows, engines, spec.threshold, warn_pct, ratio_rows=ratio_rows)
    series = metrics_mod.time_series(
        rows, engines, spec.threshold, day_range=(spec.time_from, spec.time_to))

    engine_entries = []
    vendor_points = []
    for engine, m in zip(engines, per_engine):
        engine_entries.append({
            "engine_id": m.engine_id,
            "kind": engine.kind.value,
            "tp": m.tp, "fp": m.fp, "tn": m.tn, "fn": m.fn,
            "unscanned": m.unscanned,
            "n_labeled": m.n_labeled,
            "tpr": m.tpr,
            "fpr": m.fpr,
            "sample_ratio": {
                "malicious": m.sample_ratio[Label.MALICIOUS],
                "benign": m.sample_ratio[Label.BENIGN],
                "unlabeled": m.sample_ratio[Label.UNLABELED],
            },
            "low_coverage_warning": m.low_coverage_warning,
        })
        if engine.kind is not EngineKind.INTERNAL_MODEL:
            vendor_points.append({"engine_id": m.engine_id, "fpr": m.fpr, "tpr": m.tpr})

    roc_entries = []
    for engine in engines:
        if engine.kind is not EngineKind.INTERNAL_MODEL:
            continue
        curve = metrics_mod.roc(rows, engine)
        if curve is None:
            roc_entries.append({"engine_id": engine.engine_id, "defined": False,
                                "auc": None, "points": []})
        else:
            roc_entries.append({
                "engine_id": engine.engine_id,
                "defined": True,
                "auc": curve.auc,
                "points": [
                    # null threshold marks the above-every-score sentinel
                    {"threshold": _finite(p.threshold), "fpr": p.fpr, "tpr": p.tpr}
                    for p in curve.points
                ],
            })

    return {
        "schema": f"{SCHEMA_PREFIX}.metrics.v1",
        "empty": not rows,
        "query": query_spec_to_wire(spec),
        "row_count": len(rows),
        "engines": engine_entries,
        "time_series": [
            {
                "engine_id": engine_id,
                "points": [
                    {"day": p.day.isoformat(), "tpr": p.tpr, "fpr": p.fpr,
                     "n_labeled": p.n_labeled}
                    for p in points
                ],
            }
            for engine_id, points in series.items()
        ],
        "roc": roc_entries,
        "vendor_points": vendor_points,
    }


def quality_payload(
    store: TelemetryStore,
    spec: QuerySpec,
    expected_sources: frozenset[str],
    window: int,
    z_max: float,
) -> dict:
    engines = store.selected_engines(spec)
    rows = store.select(spec)
    report = quality_mod.quality_report(
        rows, engines, expected_sources, window, z_max,
        day_range=(spec.time_from, spec.time_to))
    return {
        "schema": f"{SCHEMA_PREFIX}.quality.v1",
        "empty": not rows,
        "query": query_spec_to_wire(spec),
        "row_count": len(rows),
        "issue_series": [
            {
                "day": d.day.isoformat(),
                "pct_missing_source": d.pct_missing_source,
                "pct_unlabeled": d.pct_unlabeled,
                "pct_missing_filetype": d.pct_missing_filetype,
            }
            for d in report.issue_series
        ],
        "volume_series": [
            {
                "engine_id": engine_id,
                "label": cls.value,
                "points": [{"day": d.isoformat(), "count": c} for d, c in points],
            }
            for engine_id, engine_series in report.volume_series.items()
            for cls, points in engine_series.items()
        ],
        "anomalies": [
            {
                "series": f.series_key,
                "day": f.day.isoformat(),
                "direction": f.direction.value,
                "robust_z": _finite(f.robust_z),
            }
            for f in report.anomalies
        ],
    }


def breakdown_payload(
    store: TelemetryStore,
    spec: QuerySpec,
    group_by: breakdown_mod.GroupBy,
    substring: Optional[str] = None,
    sort_key: str = "group_key",
    descending: bool = False,
) -> dict:
    models = [e for e in store.selected_engines(spec)
              if e.kind is EngineKind.INTERNAL_MODEL]
    if not models:
        raise ValueError("breakdown requires at least one selected model")
    model = models[0]
    rows = store.select(spec)
    table = breakdown_mod.breakdown(rows, model, spec.threshold, group_by)
    table = breakdown_mod.filter_sort(table, substring, sort_key, descending)
    return {
        "schema": f"{SCHEMA_PREFIX}.breakdown.v1",
        "empty": not table,
        "query": query_spec_to_wire(spec),
        "model": model.engine_id,
        "group_by": group_by.value,
        "rows": [
            {
                "group_key": r.group_key,
                "vendors": sorted(r.vendors),
                "detected": r.detected,
                "missed": r.missed,
                "total_samples": r.total_samples,
                "total_malicious": r.total_malicious,
                "endpoints": r.endpoints,
                "detection_ratio": r.detection_ratio,
                "color_bucket": breakdown_mod.color_bucket(r.detection_ratio),
            }
            for r in table
        ],
    }


def _row_entry(row: WideRow) -> dict:
    record = row.record
    family, vendors = breakdown_mod.canonical_family(record.family_names)
    return {
        "artifact_id": record.artifact_id,
        "ingest_day": record.ingest_day.isoformat(),
        "kind": record.artifact_kind.value,
        "file_type": record.file_type,
        "source_feed": record.source_feed,
        "label": row.label.label.value,
        "label_reason": row.label.reason.value,
        "vote_score": row.label.vote_score,
        "family": family,
        "family_vendors": sorted(vendors),
        "prevalence": record.prevalence,
        "age_days": record.age_days,
        "endpoint_count": record.endpoint_count,
        "observations": [
            {
                "engine": o.engine_id,
                "scanned": o.scanned,
                "score": o.score,
                "verdict": o.verdict.value if o.verdict else None,
            }
            for o in record.observations
        ],
    }


def details_payload(
    store: TelemetryStore,
    spec: QuerySpec,
    element: ChartElementRef,
    page: int,
    page_size: int,
) -> dict:
    rows, total = store.details(spec, element, page, page_size)
    return {
        "schema": f"{SCHEMA_PREFIX}.details.v1",
        "empty": total == 0,
        "query": query_spec_to_wire(spec),
        "total": total,
        "page": page,
        "page_size": page_size,
        "rows": [_row_entry(r) for r in rows],
    }


def details_csv(store: TelemetryStore, spec: QuerySpec, element: ChartElementRef) -> bytes:
    rows = store.element_rows(spec, element)
    return export_csv(rows, store.selected_engines(spec))


def meta_payload(store: TelemetryStore) -> dict:
    """Engine registry, feeds, loaded date range, and the default query.

    The default mirrors the dashboard's landing view: the latest
    deployed model over the last two weeks of loaded data.
    """
    engines = [
        {
            "engine_id": e.engine_id,
            "kind": e.kind.value,
            "model_type": e.model_type.value if e.model_type else None,
            "version": e.version,
            "default_threshold": e.default_threshold,
            "vote_weight": e.vote_weight,
        }
        for e in store.engines
    ]
    date_range = store.date_range()
    defaults = None
    models = [e for e in store.engines if e.kind is EngineKind.INTERNAL_MODEL]
    if date_range and models:
        latest = max(models, key=lambda e: (e.version, e.engine_id))
        first, last = date_range
        two_weeks_back = max(first, last - timedelta(days=13))
        vendor_ids = sorted(e.engine_id for e in store.engines
                            if e.kind is not EngineKind.INTERNAL_MODEL)
        defaults = {
            "source_feeds": [],
            "time_from": two_weeks_back.isoformat(),
            "time_to": last.isoformat(),
            "model_type": latest.model_type.value,
            "model_versions": [latest.engine_id],
            "vendor_ids": vendor_ids,
            "threshold": None,
            "file_types_include": [],
            "scored_by_model_only": False,
            "min_coverage_pct": 0,
        }
    return {
        "schema": f"{SCHEMA_PREFIX}.meta.v1",
        "engines": engines,
        "sources": store.source_feeds(),
        "date_range": (
            {"from": date_range[0].isoformat(), "to": date_range[1].isoformat()}
            if date_range else None
        ),
        "defaults": defaults,
        "row_count": store.row_count,
    }
