"""Shared fixtures: hand-built records, a small engine registry, store factories."""
from __future__ import annotations

import json
from datetime import date
from typing import Optional

import pytest

from aitotal.core import (
    ArtifactKind,
    ArtifactRecord,
    Engine,
    EngineKind,
    EngineObservation,
    SandboxVerdict,
    Verdict,
)
from aitotal.labeling import LabelPolicy
from aitotal.store import TelemetryStore, record_to_wire

DAY = date(2020, 7, 15)


def hex_id(n: int) -> str:
    return f"{n:064x}"


def obs(engine_id: str, verdict: Optional[str] = None, score: Optional[float] = None,
        scanned: bool = True, scan_ts: date = DAY) -> EngineObservation:
    if not scanned:
        return EngineObservation(engine_id=engine_id, scanned=False)
    return EngineObservation(
        engine_id=engine_id,
        scanned=True,
        score=score,
        verdict=Verdict(verdict) if verdict else None,
        scan_ts=scan_ts,
    )


def record(n: int = 1, kind: ArtifactKind = ArtifactKind.PE,
           observations: tuple = (), file_type: Optional[str] = "PE32",
           source_feed: str = "feed-alpha", ingest_day: date = DAY,
           prevalence: int = 1, age_days: int = 1, endpoint_count: int = 0,
           signature_match: bool = False,
           sandbox_verdict: SandboxVerdict = SandboxVerdict.NOT_RUN,
           family_names: tuple = (), sources_present: frozenset = frozenset({"telemetry"}),
           first_seen: Optional[date] = None) -> ArtifactRecord:
    return ArtifactRecord(
        artifact_id=hex_id(n),
        artifact_kind=kind,
        file_type=file_type,
        source_feed=source_feed,
        first_seen=first_seen or ingest_day,
        ingest_day=ingest_day,
        prevalence=prevalence,
        age_days=age_days,
        endpoint_count=endpoint_count,
        signature_match=signature_match,
        sandbox_verdict=sandbox_verdict,
        family_names=family_names,
        sources_present=sources_present,
        observations=observations,
    )


def wire_line(rec: ArtifactRecord) -> str:
    return json.dumps(record_to_wire(rec), separators=(",", ":"))


@pytest.fixture
def engines() -> list[Engine]:
    return [
        Engine("model-pe", EngineKind.INTERNAL_MODEL, model_type=ArtifactKind.PE,
               version="PE_20200930", default_threshold=0.5),
        Engine("v1", EngineKind.VENDOR, vote_weight=1.0),
        Engine("v2", EngineKind.VENDOR, vote_weight=1.0),
        Engine("v3", EngineKind.VENDOR, vote_weight=1.0),
        Engine("v4", EngineKind.VENDOR, vote_weight=1.0),
        Engine("rep", EngineKind.REPUTATION),
    ]


@pytest.fixture
def vendors(engines) -> list[Engine]:
    return [e for e in engines if e.kind is EngineKind.VENDOR]


@pytest.fixture
def policy() -> LabelPolicy:
    return LabelPolicy()


@pytest.fixture
def store_factory(tmp_path, engines):
    counter = iter(range(10_000))

    def make(records=(), policy: Optional[LabelPolicy] = None):
        store = TelemetryStore(tmp_path / f"data-{next(counter)}", engines, policy)
        if records:
            summary = store.ingest(wire_line(r) for r in records)
            assert summary.rejected == 0, summary.errors
        return store
    return make
