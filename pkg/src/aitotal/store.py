"""Embedded telemetry store: ingestion, the daily wide table, and query filtering.

Persistence is deliberately boring: accepted records are appended to
JSONL segment files under the data directory and an in-memory index
keyed by artifact_id is rebuilt at startup by replaying the segments in
order. Re-ingesting an artifact merges per-engine observations (latest
scan_ts per engine wins) and takes metadata from the newest record, so
replaying a log with duplicates converges to the same state.

Queries evaluate a QuerySpec — the full filter-panel state — against a
snapshot of the index. Labels are joined lazily at query time, as of
the query's time_to, because labels evolve and caching one past its
as_of date would corrupt historical comparisons.

Concurrency: one writer at a time (ingest holds a lock and swaps the
index reference atomically); readers grab the reference once per query
and therefore see a consistent snapshot.
"""
from __future__ import annotations

import csv
import io
import json
import threading
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path
from typing import Iterable, Optional

from .breakdown import canonical_family
from .core import (
    ArtifactKind,
    ArtifactRecord,
    Engine,
    EngineKind,
    EngineObservation,
    Label,
    LabelRecord,
    Verdict,
    validate_record,
)
from .labeling import LabelPolicy, label as compute_label

CONFUSION_METRICS = ("TP", "FP", "FN", "TN", "unscanned")


class UnknownEngineError(ValueError):
    """A QuerySpec or chart element referenced an engine id not in the registry."""


class ElementError(ValueError):
    """A chart element reference is inconsistent with its QuerySpec."""


@dataclass(frozen=True)
class QuerySpec:
    """Full filter-panel state for one query.

    Empty source_feeds / file_types_include mean "all". The coverage
    slider keeps only artifacts scanned by at least min_coverage_pct%
    of the selected engines (models plus vendors), so at 100 every
    selected engine is evaluated against the identical row set.
    """

    time_from: date
    time_to: date
    model_type: ArtifactKind
    source_feeds: frozenset[str] = frozenset()
    model_versions: frozenset[str] = frozenset()
    vendor_ids: frozenset[str] = frozenset()
    threshold: Optional[float] = None
    file_types_include: frozenset[str] = frozenset()
    scored_by_model_only: bool = False
    min_coverage_pct: int = 0

    def __post_init__(self):
        for violation in spec_violations(self):
            raise ValueError(violation)

    @property
    def selected_engine_ids(self) -> frozenset[str]:
        return self.model_versions | self.vendor_ids


def spec_violations(spec: QuerySpec) -> list[str]:
    violations = []
    if spec.time_from > spec.time_to:
        violations.append("time_from must be <= time_to")
    if not 0 <= spec.min_coverage_pct <= 100:
        violations.append(f"min_coverage_pct out of range [0,100]: {spec.min_coverage_pct}")
    if spec.threshold is not None and not 0.0 <= spec.threshold <= 1.0:
        violations.append(f"threshold out of range [0,1]: {spec.threshold}")
    return violations


def parse_query_spec(raw: dict) -> tuple[Optional[QuerySpec], list[str]]:
    """Build a QuerySpec from its JSON wire form, collecting all violations."""
    errors: list[str] = []
    if not isinstance(raw, dict):
        return None, ["query must be a JSON object"]

    def parse_day(key: str) -> Optional[date]:
        value = raw.get(key)
        try:
            return date.fromisoformat(value)
        except (TypeError, ValueError):
            errors.append(f"{key} must be a YYYY-MM-DD string")
            return None

    def parse_str_set(key: str) -> frozenset[str]:
        value = raw.get(key, [])
        if value is None:
            return frozenset()
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            errors.append(f"{key} must be a list of strings")
            return frozenset()
        return frozenset(value)

    time_from = parse_day("time_from")
    time_to = parse_day("time_to")
    model_type = None
    try:
        model_type = ArtifactKind(raw.get("model_type"))
    except ValueError:
        errors.append(f"model_type unknown: {raw.get('model_type')!r}")

    threshold = raw.get("threshold")
    if threshold is not None:
        if isinstance(threshold, bool) or not isinstance(threshold, (int, float)):
            errors.append("threshold must be a number or null")
            threshold = None
        elif not 0.0 <= threshold <= 1.0:
            errors.append(f"threshold out of range [0,1]: {threshold}")
            threshold = None
        else:
            threshold = float(threshold)

    coverage = raw.get("min_coverage_pct", 0)
    if isinstance(coverage, bool) or not isinstance(coverage, int):
        errors.append("min_coverage_pct must be an integer")
        coverage = 0
    elif not 0 <= coverage <= 100:
        errors.append(f"min_coverage_pct out of range [0,100]: {coverage}")
        coverage = 0

    scored_only = raw.get("scored_by_model_only", False)
    if not isinstance(scored_only, bool):
        errors.append("scored_by_model_only must be a boolean")
        scored_only = False

    source_feeds = parse_str_set("source_feeds")
    model_versions = parse_str_set("model_versions")
    vendor_ids = parse_str_set("vendor_ids")
    file_types = parse_str_set("file_types_include")

    if time_from and time_to and time_from > time_to:
        errors.append("time_from must be <= time_to")

    if errors:
        return None, errors
    return QuerySpec(
        time_from=time_from,
        time_to=time_to,
        model_type=model_type,
        source_feeds=source_feeds,
        model_versions=model_versions,
        vendor_ids=vendor_ids,
        threshold=threshold,
        file_types_include=file_types,
        scored_by_model_only=scored_only,
        min_coverage_pct=coverage,
    ), []


def query_spec_to_wire(spec: QuerySpec) -> dict:
    return {
        "source_feeds": sorted(spec.source_feeds),
        "time_from": spec.time_from.isoformat(),
        "time_to": spec.time_to.isoformat(),
        "model_type": spec.model_type.value,
        "model_versions": sorted(spec.model_versions),
        "vendor_ids": sorted(spec.vendor_ids),
        "threshold": spec.threshold,
        "file_types_include": sorted(spec.file_types_include),
        "scored_by_model_only": spec.scored_by_model_only,
        "min_coverage_pct": spec.min_coverage_pct,
    }


@dataclass(frozen=True)
class WideRow:
    """One artifact joined with its label as of the query's time_to."""

    record: ArtifactRecord
    label: LabelRecord

    @property
    def ingest_day(self) -> date:
        return self.record.ingest_day


@dataclass(frozen=True)
class ChartElementRef:
    """Names one clickable chart element for details-on-demand.

    Either a confusion cell (engine_id + metric, optionally restricted
    to one day) or a breakdown table row (group_by + group_key).
    """

    engine_id: Optional[str] = None
    metric: Optional[str] = None
    day: Optional[date] = None
    group_by: Optional[str] = None  # "family" | "filetype"
    group_key: Optional[str] = None

    def __post_init__(self):
        cell = self.engine_id is not None or self.metric is not None
        row = self.group_by is not None or self.group_key is not None
        if cell == row:
            raise ValueError("element must be either a confusion cell or a breakdown row")
        if cell:
            if self.engine_id is None or self.metric is None:
                raise ValueError("confusion cell needs engine_id and metric")
            if self.metric not in CONFUSION_METRICS:
                raise ValueError(f"unknown metric {self.metric!r}")
        else:
            if self.group_by not in ("family", "filetype") or self.group_key is None:
                raise ValueError("breakdown row needs group_by in {family, filetype} and group_key")


@dataclass
class IngestSummary:
    accepted: int = 0
    rejected: int = 0
    errors: list[dict] = field(default_factory=list)


def record_to_wire(record: ArtifactRecord) -> dict:
    """Serialize a record to its JSONL wire object (inverse of validate_record)."""
    return {
        "artifact_id": record.artifact_id,
        "kind": record.artifact_kind.value,
        "file_type": record.file_type,
        "source_feed": record.source_feed,
        "first_seen": record.first_seen.isoformat(),
        "ingest_day": record.ingest_day.isoformat(),
        "prevalence": record.prevalence,
        "age_days": record.age_days,
        "endpoint_count": record.endpoint_count,
        "signature_match": record.signature_match,
        "sandbox_verdict": record.sandbox_verdict.value,
        "families": [{"vendor": v, "name": n} for v, n in record.family_names],
        "sources_present": sorted(record.sources_present),
        "observations": [
            {
                "engine": obs.engine_id,
                "scanned": obs.scanned,
                "score": obs.score,
                "verdict": obs.verdict.value if obs.verdict else None,
                "scan_ts": obs.scan_ts.isoformat() if obs.scan_ts else None,
            }
            for obs in record.observations
        ],
    }


def _merge_observations(
    old: Iterable[EngineObservation], new: Iterable[EngineObservation]
) -> tuple[EngineObservation, ...]:
    # Latest scan_ts per engine wins; a scanned observation always beats
    # an unscanned one; on equal scan_ts the incoming record wins.
    merged: dict[str, EngineObservation] = {obs.engine_id: obs for obs in old}
    for obs in new:
        current = merged.get(obs.engine_id)
        if current is None:
            merged[obs.engine_id] = obs
        elif not current.scanned:
            merged[obs.engine_id] = obs
        elif obs.scanned and obs.scan_ts >= current.scan_ts:
            merged[obs.engine_id] = obs
    return tuple(sorted(merged.values(), key=lambda o: o.engine_id))


def merge_records(old: ArtifactRecord, new: ArtifactRecord) -> ArtifactRecord:
    """Upsert: newest metadata, per-engine observation merge."""
    return replace(new, observations=_merge_observations(old.observations, new.observations))


class TelemetryStore:
    """Ingests wire records and answers QuerySpec selections.

    engines (the registry) and the label policy are needed for queries;
    a store opened only for ingestion can omit them.
    """

    def __init__(
        self,
        data_dir: "Path | str",
        engines: Optional[list[Engine]] = None,
        policy: Optional[LabelPolicy] = None,
    ):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.engines = list(engines) if engines else []
        self.policy = policy or LabelPolicy()
        self._by_id = {e.engine_id: e for e in self.engines}
        if len(self._by_id) != len(self.engines):
            raise ValueError("engine ids must be unique")
        self._records: dict[str, ArtifactRecord] = {}
        self._write_lock = threading.Lock()
        self._replay_segments()

    # ------------------------------------------------------------------
    # Ingestion and persistence
    # ------------------------------------------------------------------

    def _segment_paths(self) -> list[Path]:
        return sorted(self.data_dir.glob("segment-*.jsonl"))

    def _replay_segments(self) -> None:
        records: dict[str, ArtifactRecord] = {}
        for path in self._segment_paths():
            with path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    record, errors = validate_record(json.loads(line))
                    if errors:
                        raise ValueError(f"corrupt segment {path.name}: {errors}")
                    self._upsert(records, record)
        self._records = records

    @staticmethod
    def _upsert(records: dict[str, ArtifactRecord], record: ArtifactRecord) -> None:
        existing = records.get(record.artifact_id)
        records[record.artifact_id] = merge_records(existing, record) if existing else record

    def ingest(self, lines: Iterable[str]) -> IngestSummary:
        """Ingest a JSONL batch: validate every line, append the good ones.

        Per-line failures are collected in the summary and never abort
        the batch. Line numbers are 1-based.
        """
        summary = IngestSummary()
        accepted: list[ArtifactRecord] = []
        for line_no, line in enumerate(lines, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                summary.rejected += 1
                summary.errors.append({"line": line_no, "errors": [f"invalid JSON: {exc.msg}"]})
                continue
            record, errors = validate_record(raw)
            if errors:
                summary.rejected += 1
                summary.errors.append({"line": line_no, "errors": errors})
                continue
            accepted.append(record)
            summary.accepted += 1

        if not accepted:
            return summary
        with self._write_lock:
            segment = self.data_dir / f"segment-{len(self._segment_paths()) + 1:06d}.jsonl"
            with segment.open("w", encoding="utf-8") as fh:
                for record in accepted:
                    fh.write(json.dumps(record_to_wire(record), separators=(",", ":")) + "\n")
            updated = dict(self._records)
            for record in accepted:
                self._upsert(updated, record)
            self._records = updated  # atomic swap: readers keep their snapshot
        return summary

    def ingest_records(self, records: Iterable[ArtifactRecord]) -> IngestSummary:
        return self.ingest(
            json.dumps(record_to_wire(r), separators=(",", ":")) for r in records
        )

    def snapshot_bytes(self) -> bytes:
        """Canonical serialization of the merged state (for idempotence checks)."""
        buf = io.StringIO()
        for artifact_id in sorted(self._records):
            wire = record_to_wire(self._records[artifact_id])
            buf.write(json.dumps(wire, separators=(",", ":"), sort_keys=True) + "\n")
        return buf.getvalue().encode("utf-8")

    # ------------------------------------------------------------------
    # Registry helpers
    # ------------------------------------------------------------------

    def engine(self, engine_id: str) -> Engine:
        engine = self._by_id.get(engine_id)
        if engine is None:
            raise UnknownEngineError(f"unknown engine id: {engine_id}")
        return engine

    def vendors(self) -> list[Engine]:
        return [e for e in self.engines if e.kind is EngineKind.VENDOR]

    def selected_engines(self, spec: QuerySpec) -> list[Engine]:
        """Selected engines in registry order: models first, then vendors."""
        models = [self.engine(m) for m in sorted(spec.model_versions)]
        vendors = [self.engine(v) for v in sorted(spec.vendor_ids)]
        for engine in models:
            if engine.kind is not EngineKind.INTERNAL_MODEL:
                raise UnknownEngineError(f"{engine.engine_id} is not an internal model")
        for engine in vendors:
            if engine.kind is EngineKind.INTERNAL_MODEL:
                raise UnknownEngineError(f"{engine.engine_id} is not a vendor or reputation engine")
        order = {e.engine_id: i for i, e in enumerate(self.engines)}
        return sorted(models + vendors, key=lambda e: order[e.engine_id])

    @property
    def row_count(self) -> int:
        return len(self._records)

    def date_range(self) -> Optional[tuple[date, date]]:
        if not self._records:
            return None
        days = [r.ingest_day for r in self._records.values()]
        return min(days), max(days)

    def source_feeds(self) -> list[str]:
        return sorted({r.source_feed for r in self._records.values()})

    # ------------------------------------------------------------------
    # Selection
    # ------------------------------------------------------------------

    def select(self, spec: QuerySpec, *, apply_coverage: bool = True) -> list[WideRow]:
        """Rows matching the spec, labels joined as of spec.time_to.

        apply_coverage=False skips only the coverage-percent filter;
        the sample-ratio chart uses that wider set so coverage deficits
        stay visible instead of being filtered out of their own plot.
        Rows come back sorted by artifact_id.
        """
        selected = self.selected_engines(spec)
        selected_ids = [e.engine_id for e in selected]
        vendors = self.vendors()
        records = self._records  # snapshot for this query
        rows: list[WideRow] = []
        for artifact_id in sorted(records):
            record = records[artifact_id]
            if not spec.time_from <= record.ingest_day <= spec.time_to:
                continue
            if spec.source_feeds and record.source_feed not in spec.source_feeds:
                continue
            if record.artifact_kind is not spec.model_type:
                continue
            if spec.file_types_include and record.file_type not in spec.file_types_include:
                continue
            if spec.scored_by_model_only:
                if not any(self._scanned_by(record, m) for m in spec.model_versions):
                    continue
            if apply_coverage and selected_ids:
                scanned = sum(1 for e in selected_ids if self._scanned_by(record, e))
                # integer form of scanned/len >= pct/100, exact
                if 100 * scanned < spec.min_coverage_pct * len(selected_ids):
                    continue
            rows.append(WideRow(
                record=record,
                label=compute_label(record, vendors, self.policy, spec.time_to),
            ))
        return rows

    @staticmethod
    def _scanned_by(record: ArtifactRecord, engine_id: str) -> bool:
        obs = record.observation_for(engine_id)
        return obs is not None and obs.scanned

    # ------------------------------------------------------------------
    # Details-on-demand
    # ------------------------------------------------------------------

    def details(
        self,
        spec: QuerySpec,
        element: ChartElementRef,
        page: int = 0,
        page_size: int = 50,
    ) -> tuple[list[WideRow], int]:
        """Rows behind one chart element, paginated, ordered by artifact_id."""
        if page < 0 or page_size < 1:
            raise ValueError("page must be >= 0 and page_size >= 1")
        matching = self.element_rows(spec, element)
        total = len(matching)
        start = page * page_size
        return matching[start:start + page_size], total

    def element_rows(self, spec: QuerySpec, element: ChartElementRef) -> list[WideRow]:
        rows = self.select(spec)
        if element.group_by is not None:
            return [r for r in rows if self._group_key(r, element.group_by) == element.group_key]

        if element.engine_id not in spec.selected_engine_ids:
            raise ElementError(f"engine {element.engine_id} is not selected by the query")
        engine = self.engine(element.engine_id)
        threshold = _effective_threshold(engine, spec.threshold)
        if element.day is not None:
            rows = [r for r in rows if r.ingest_day == element.day]
        out = []
        for row in rows:
            cell = _confusion_cell(row, engine, threshold)
            if cell == element.metric:
                out.append(row)
        return out

    @staticmethod
    def _group_key(row: WideRow, group_by: str) -> str:
        if group_by == "family":
            name, _ = canonical_family(row.record.family_names)
            return name
        return row.record.file_type if row.record.file_type is not None else "<unknown>"


def _effective_threshold(engine: Engine, query_threshold: Optional[float]) -> Optional[float]:
    if engine.kind is not EngineKind.INTERNAL_MODEL:
        return None
    return query_threshold if query_threshold is not None else engine.default_threshold


def _confusion_cell(row: WideRow, engine: Engine, threshold: Optional[float]) -> Optional[str]:
    """Which cell (TP/FP/FN/TN/unscanned) this row lands in for this engine."""
    from .metrics import Classification, classify  # local import to avoid a cycle

    obs = row.record.observation_for(engine.engine_id)
    decision = classify(obs, engine, threshold)
    if decision is Classification.UNSCANNED:
        return "unscanned"
    if row.label.label is Label.MALICIOUS:
        return "TP" if decision is Classification.MALICIOUS else "FN"
    if row.label.label is Label.BENIGN:
        return "FP" if decision is Classification.MALICIOUS else "TN"
    return None  # unlabeled rows sit in no confusion cell


def export_csv(rows: list[WideRow], engines: list[Engine]) -> bytes:
    """RFC-4180 CSV of the given rows, one score/verdict column per engine."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    header = [
        "artifact_id", "ingest_day", "kind", "file_type", "source_feed",
        "label", "family_canonical", "endpoint_count",
    ] + [e.engine_id for e in engines]
    writer.writerow(header)
    for row in rows:
        record = row.record
        family, _ = canonical_family(record.family_names)
        cells = [
            record.artifact_id,
            record.ingest_day.isoformat(),
            record.artifact_kind.value,
            record.file_type if record.file_type is not None else "",
            record.source_feed,
            row.label.label.value,
            family,
            record.endpoint_count,
        ]
        for engine in engines:
            obs = record.observation_for(engine.engine_id)
            if obs is None or not obs.scanned:
                cells.append("")
            elif obs.score is not None:
                cells.append(repr(obs.score))
            else:
                cells.append(obs.verdict.value)
        writer.writerow(cells)
    return buf.getvalue().encode("utf-8")
