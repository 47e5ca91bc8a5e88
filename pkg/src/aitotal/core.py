"""Domain types shared by every part of the monitoring stack.

An *artifact* is one scanned object (file, URL, email) identified by a
64-hex content hash. An *engine* is anything that emits a judgement on
an artifact: an internal ML model (real-valued score), an external
vendor, or a reputation service (binary verdict). All types here are
immutable value objects, safe to share across threads.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Optional

HEX64_RE = re.compile(r"^[0-9a-f]{64}$")


class ArtifactKind(str, Enum):
    """Coarse artifact category; each internal model scores one kind."""

    PE = "PE"
    OFFICE = "Office"
    PDF = "PDF"
    URL = "URL"
    EMAIL = "Email"
    OTHER = "Other"


class Verdict(str, Enum):
    MALICIOUS = "Malicious"
    BENIGN = "Benign"


class SandboxVerdict(str, Enum):
    MALICIOUS = "Malicious"
    BENIGN = "Benign"
    NOT_RUN = "NotRun"


class EngineKind(str, Enum):
    INTERNAL_MODEL = "InternalModel"
    VENDOR = "Vendor"
    REPUTATION = "Reputation"


class Label(str, Enum):
    MALICIOUS = "Malicious"
    BENIGN = "Benign"
    UNLABELED = "Unlabeled"


class LabelReason(str, Enum):
    """Which labeling rule decided the label (see labeling module)."""

    SIGNATURE_OVERRIDE = "SignatureOverride"
    SANDBOX_OVERRIDE = "SandboxOverride"
    PREVALENCE_BENIGN = "PrevalenceBenign"
    VENDOR_VOTE = "VendorVote"
    NO_QUORUM = "NoQuorum"
    CONTESTED = "Contested"


@dataclass(frozen=True)
class EngineObservation:
    """One engine's scan result on one artifact.

    scanned=False means the engine never scored the artifact; score,
    verdict and scan_ts must all be absent then. When scanned, exactly
    one of score (internal models) or verdict (vendors/reputation) is
    present.
    """

    engine_id: str
    scanned: bool
    score: Optional[float] = None
    verdict: Optional[Verdict] = None
    scan_ts: Optional[date] = None

    def __post_init__(self):
        if not self.scanned:
            if self.score is not None or self.verdict is not None or self.scan_ts is not None:
                raise ValueError("unscanned observation must not carry score/verdict/scan_ts")
        else:
            if (self.score is None) == (self.verdict is None):
                raise ValueError("scanned observation needs exactly one of score or verdict")
            if self.scan_ts is None:
                raise ValueError("scanned observation needs scan_ts")
            if self.score is not None and not 0.0 <= self.score <= 1.0:
                raise ValueError(f"score must be in [0,1], got {self.score}")


@dataclass(frozen=True)
class ArtifactRecord:
    """One observed artifact with metadata, provenance and per-engine results.

    ingest_day is the day the record entered the feed; it is the
    bucketing axis for all daily aggregation (the data-quality charts
    are about feed behaviour per day, not artifact age).
    """

    artifact_id: str
    artifact_kind: ArtifactKind
    file_type: Optional[str]
    source_feed: str
    first_seen: date
    ingest_day: date
    prevalence: int
    age_days: int
    endpoint_count: int
    signature_match: bool
    sandbox_verdict: SandboxVerdict
    family_names: tuple[tuple[str, str], ...] = ()
    sources_present: frozenset[str] = frozenset()
    observations: tuple[EngineObservation, ...] = ()

    def __post_init__(self):
        if not HEX64_RE.match(self.artifact_id):
            raise ValueError(f"artifact_id must be 64 lowercase hex chars: {self.artifact_id!r}")
        for name, value in (("prevalence", self.prevalence),
                            ("age_days", self.age_days),
                            ("endpoint_count", self.endpoint_count)):
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")
        seen = set()
        for obs in self.observations:
            if obs.engine_id in seen:
                raise ValueError(f"duplicate engine observation: {obs.engine_id}")
            seen.add(obs.engine_id)

    def observation_for(self, engine_id: str) -> Optional[EngineObservation]:
        for obs in self.observations:
            if obs.engine_id == engine_id:
                return obs
        return None


@dataclass(frozen=True)
class Engine:
    """A scoring entity registered with the service.

    Internal models carry a model_type (the artifact kind they score)
    and a default decision threshold; vendors carry a positive vote
    weight used by labeling. Models never vote on their own labels, so
    vote_weight must be absent for them.
    """

    engine_id: str
    kind: EngineKind
    model_type: Optional[ArtifactKind] = None
    version: str = ""
    default_threshold: Optional[float] = None
    vote_weight: Optional[float] = None

    def __post_init__(self):
        if self.kind is EngineKind.INTERNAL_MODEL:
            if self.vote_weight is not None:
                raise ValueError("internal models must not have vote_weight")
            if self.model_type is None:
                raise ValueError("internal models need model_type")
            if self.default_threshold is None or not 0.0 < self.default_threshold < 1.0:
                raise ValueError("internal models need default_threshold in (0,1)")
        elif self.kind is EngineKind.VENDOR:
            if self.vote_weight is None or self.vote_weight <= 0:
                raise ValueError("vendors need vote_weight > 0")
        if self.default_threshold is not None and not 0.0 < self.default_threshold < 1.0:
            raise ValueError("default_threshold must be in (0,1)")


@dataclass(frozen=True)
class LabelRecord:
    """Derived ground-truth label of one artifact as of a date.

    vote_score is the weighted malicious fraction across voting
    vendors, present whenever at least one vendor voted. Labels are
    recomputed per query and never cached past their as_of date.
    """

    artifact_id: str
    as_of: date
    label: Label
    reason: LabelReason
    vote_score: Optional[float] = None

    def __post_init__(self):
        if self.reason is LabelReason.VENDOR_VOTE and self.vote_score is None:
            raise ValueError("VendorVote labels need a vote_score")
        unlabeled = self.label is Label.UNLABELED
        quorumish = self.reason in (LabelReason.NO_QUORUM, LabelReason.CONTESTED)
        if unlabeled != quorumish:
            raise ValueError(f"label {self.label.value} inconsistent with reason {self.reason.value}")


def _parse_date(value, field_name: str, errors: list[str]) -> Optional[date]:
    if not isinstance(value, str):
        errors.append(f"{field_name} must be a YYYY-MM-DD string")
        return None
    try:
        return date.fromisoformat(value)
    except ValueError:
        errors.append(f"{field_name} is not a valid date: {value!r}")
        return None


def _check_count(raw: dict, key: str, errors: list[str]) -> int:
    value = raw.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append(f"{key} must be a non-negative integer")
        return 0
    if value < 0:
        errors.append(f"{key} must be >= 0, got {value}")
        return 0
    return value


def _validate_observation(i: int, raw, errors: list[str]) -> Optional[EngineObservation]:
    if not isinstance(raw, dict):
        errors.append(f"observations[{i}] must be an object")
        return None
    engine = raw.get("engine")
    if not isinstance(engine, str) or not engine:
        errors.append(f"observations[{i}].engine must be a non-empty string")
        return None
    scanned = raw.get("scanned")
    if not isinstance(scanned, bool):
        errors.append(f"observations[{i}].scanned must be a boolean")
        return None
    score = raw.get("score")
    verdict_raw = raw.get("verdict")
    scan_ts_raw = raw.get("scan_ts")
    ok = True

    verdict = None
    if verdict_raw is not None:
        try:
            verdict = Verdict(verdict_raw)
        except ValueError:
            errors.append(f"observations[{i}].verdict unknown: {verdict_raw!r}")
            ok = False
    if score is not None:
        if isinstance(score, bool) or not isinstance(score, (int, float)):
            errors.append(f"observations[{i}].score must be a number")
            ok = False
        elif not 0.0 <= score <= 1.0:
            errors.append(f"observations[{i}].score out of range [0,1]: {score}")
            ok = False

    if not scanned:
        if score is not None or verdict_raw is not None or scan_ts_raw is not None:
            errors.append(f"observations[{i}]: unscanned observation carries score/verdict/scan_ts")
            ok = False
        return EngineObservation(engine_id=engine, scanned=False) if ok else None

    if score is not None and verdict_raw is not None:
        errors.append(f"observations[{i}]: score and verdict both present")
        ok = False
    if score is None and verdict_raw is None:
        errors.append(f"observations[{i}]: scanned observation needs score or verdict")
        ok = False
    scan_ts = _parse_date(scan_ts_raw, f"observations[{i}].scan_ts", errors)
    if scan_ts is None:
        ok = False
    if not ok:
        return None
    return EngineObservation(
        engine_id=engine,
        scanned=True,
        score=float(score) if score is not None else None,
        verdict=verdict,
        scan_ts=scan_ts,
    )


def validate_record(raw) -> "tuple[Optional[ArtifactRecord], list[str]]":
    """Validate one parsed wire record into an ArtifactRecord.

    Total over arbitrary parsed input: returns (record, []) on success
    or (None, violations) with the complete list of problems found.
    Never raises on malformed input.
    """
    errors: list[str] = []
    if not isinstance(raw, dict):
        return None, ["record must be a JSON object"]

    artifact_id = raw.get("artifact_id")
    if not isinstance(artifact_id, str):
        errors.append("artifact_id missing or not a string")
        artifact_id = ""
    elif len(artifact_id) != 64:
        errors.append(f"artifact_id length must be 64, got {len(artifact_id)}")
    elif not HEX64_RE.match(artifact_id):
        errors.append("artifact_id must be lowercase hex")

    kind = None
    try:
        kind = ArtifactKind(raw.get("kind"))
    except ValueError:
        errors.append(f"kind unknown: {raw.get('kind')!r}")

    file_type = raw.get("file_type")
    if file_type is not None and not isinstance(file_type, str):
        errors.append("file_type must be a string or null")
        file_type = None

    source_feed = raw.get("source_feed")
    if not isinstance(source_feed, str) or not source_feed:
        errors.append("source_feed must be a non-empty string")
        source_feed = ""

    first_seen = _parse_date(raw.get("first_seen"), "first_seen", errors)
    ingest_day = _parse_date(raw.get("ingest_day"), "ingest_day", errors)

    prevalence = _check_count(raw, "prevalence", errors)
    age_days = _check_count(raw, "age_days", errors)
    endpoint_count = _check_count(raw, "endpoint_count", errors)

    signature_match = raw.get("signature_match")
    if not isinstance(signature_match, bool):
        errors.append("signature_match must be a boolean")
        signature_match = False

    sandbox = None
    try:
        sandbox = SandboxVerdict(raw.get("sandbox_verdict"))
    except ValueError:
        errors.append(f"sandbox_verdict unknown: {raw.get('sandbox_verdict')!r}")

    families: list[tuple[str, str]] = []
    families_raw = raw.get("families", [])
    if not isinstance(families_raw, list):
        errors.append("families must be a list")
    else:
        for i, fam in enumerate(families_raw):
            if (not isinstance(fam, dict) or not isinstance(fam.get("vendor"), str)
                    or not isinstance(fam.get("name"), str)):
                errors.append(f"families[{i}] must be {{vendor, name}} strings")
            else:
                families.append((fam["vendor"], fam["name"]))

    sources_raw = raw.get("sources_present", [])
    sources: list[str] = []
    if not isinstance(sources_raw, list) or not all(isinstance(s, str) for s in sources_raw):
        errors.append("sources_present must be a list of strings")
    else:
        sources = sources_raw

    observations: list[EngineObservation] = []
    obs_raw = raw.get("observations", [])
    if not isinstance(obs_raw, list):
        errors.append("observations must be a list")
    else:
        engines_seen = set()
        for i, item in enumerate(obs_raw):
            obs = _validate_observation(i, item, errors)
            if obs is None:
                continue
            if obs.engine_id in engines_seen:
                errors.append(f"duplicate engine observation: {obs.engine_id}")
                continue
            engines_seen.add(obs.engine_id)
            observations.append(obs)

    if errors:
        return None, errors
    # observation order carries no meaning (at most one per engine), so
    # canonicalize it; re-ingesting a batch then converges byte-for-byte
    observations.sort(key=lambda o: o.engine_id)
    record = ArtifactRecord(
        artifact_id=artifact_id,
        artifact_kind=kind,
        file_type=file_type,
        source_feed=source_feed,
        first_seen=first_seen,
        ingest_day=ingest_day,
        prevalence=prevalence,
        age_days=age_days,
        endpoint_count=endpoint_count,
        signature_match=signature_match,
        sandbox_verdict=sandbox,
        family_names=tuple(families),
        sources_present=frozenset(sources),
        observations=tuple(observations),
    )
    return record, []
