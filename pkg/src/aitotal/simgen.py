"""Deterministic synthetic-telemetry generator with scenario fault injection.

Every random draw comes from a counter-based Philox stream keyed by
(seed, artifact index, channel), so two runs of the same scenario are
byte-identical and adding a fault never perturbs artifacts it does not
touch: fault decisions live on their own channel, injected artifacts
live in their own index space, and baseline artifacts keep their
streams regardless of what else the scenario does.

The ground-truth manifest carries the true labels, the fault windows,
daily volume counts, and the day set the anomaly detector is expected
to flag. The expected flags are computed here with an independent
numpy-based median/MAD implementation, not by calling the production
detector, so manifest-vs-pipeline comparisons stay a real cross-check.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from enum import Enum
from typing import Iterator, Optional

import numpy as np

from .core import (
    ArtifactKind,
    Engine,
    EngineKind,
    SandboxVerdict,
    Verdict,
)
from .store import record_to_wire
from .core import validate_record

DEFAULT_START_DATE = date(2020, 7, 1)

# channel salts for the per-artifact Philox streams
_CH_BASE = 0
_CH_ENGINES = 1
_CH_FAULT = 2
_SPIKE_INDEX_BASE = 1 << 40  # injected artifacts get their own index space

_KIND_WEIGHTS = {
    ArtifactKind.PE: 0.40,
    ArtifactKind.OFFICE: 0.25,
    ArtifactKind.PDF: 0.20,
    ArtifactKind.URL: 0.10,
    ArtifactKind.EMAIL: 0.03,
    ArtifactKind.OTHER: 0.02,
}

_FILE_TYPES = {
    ArtifactKind.PE: (("PE32", 0.6), ("PE64", 0.3), ("PE-Dll", 0.1)),
    ArtifactKind.OFFICE: (("Excel-OPC", 0.35), ("Word-OPC", 0.35),
                          ("PowerPoint-OPC", 0.15), ("Excel-Legacy", 0.15)),
    ArtifactKind.PDF: (("PDF", 0.85), ("Gzip", 0.15)),
    ArtifactKind.URL: (("URL", 1.0),),
    ArtifactKind.EMAIL: (("EML", 1.0),),
    ArtifactKind.OTHER: (("Zip", 0.6), ("Text", 0.4)),
}

_FAMILIES = {
    ArtifactKind.PE: ("emotet", "trickbot", "qakbot", "agenttesla", "dridex", "formbook"),
    ArtifactKind.OFFICE: ("emotet-doc", "squirrelwaffle", "icedid-doc", "dridex-doc"),
    ArtifactKind.PDF: ("pdfdropper", "phish-pdf", "exploit-cve-2018-4990", "js-pdf"),
    ArtifactKind.URL: ("phish-kit", "credharvest"),
    ArtifactKind.EMAIL: ("spam-mal", "bec-lure"),
    ArtifactKind.OTHER: ("genmal", "packed-generic"),
}

_SOURCE_FEEDS = (("feed-alpha", 0.5), ("feed-beta", 0.3), ("feed-gamma", 0.2))
_EXPECTED_SOURCES = ("telemetry", "reputation", "sandbox")


class FaultKind(str, Enum):
    FEED_OUTAGE = "FeedOutage"
    VOLUME_SPIKE = "VolumeSpike"
    LABEL_OUTAGE = "LabelOutage"
    COVERAGE_LOSS = "CoverageLoss"
    WEAK_FAMILY = "WeakFamily"
    CONCEPT_DRIFT = "ConceptDrift"


@dataclass(frozen=True)
class FaultSpec:
    """One injected failure over a day window.

    target names the engine, file type, or family the fault applies to;
    target_kind restricts kind-scoped faults (VolumeSpike, WeakFamily,
    ConceptDrift) to one artifact kind.
    """

    kind: FaultKind
    start_day: int
    end_day: int
    magnitude: float
    target: Optional[str] = None
    target_kind: Optional[ArtifactKind] = None

    def __post_init__(self):
        if self.start_day > self.end_day:
            raise ValueError("fault start_day must be <= end_day")
        if self.start_day < 0:
            raise ValueError("fault start_day must be >= 0")
        if self.magnitude < 0:
            raise ValueError("fault magnitude must be >= 0")

    def active(self, day: int) -> bool:
        return self.start_day <= day <= self.end_day


@dataclass
class ScenarioSpec:
    """Everything the generator needs to produce one telemetry stream."""

    seed: int
    days: int
    base_daily_volume: int
    engines: list[Engine]
    faults: list[FaultSpec] = field(default_factory=list)
    start_date: date = DEFAULT_START_DATE
    malicious_rate: float = 0.3
    mal_score_beta: tuple[float, float] = (8.0, 2.0)
    ben_score_beta: tuple[float, float] = (2.0, 8.0)
    vendor_accuracy_malicious: float = 0.9
    vendor_accuracy_benign: float = 0.95

    def __post_init__(self):
        if self.days < 1:
            raise ValueError("days must be >= 1")
        if self.base_daily_volume < 0:
            raise ValueError("base_daily_volume must be >= 0")
        models = [e for e in self.engines if e.kind is EngineKind.INTERNAL_MODEL]
        vendors = [e for e in self.engines if e.kind is EngineKind.VENDOR]
        if len(models) < 1 or len(vendors) < 4:
            raise ValueError("scenario needs >= 1 internal model and >= 4 vendors")
        for fault in self.faults:
            if fault.end_day >= self.days:
                raise ValueError(
                    f"fault window [{fault.start_day},{fault.end_day}] exceeds {self.days} days")


@dataclass
class GroundTruthManifest:
    """What the generator knows to be true about its own output."""

    scenario_name: str
    seed: int
    days: int
    start_date: date
    true_labels: dict[str, str]
    daily_total: list[int]
    daily_by_kind: dict[str, list[int]]
    fault_windows: list[dict]
    expected_anomalies: dict[str, list[dict]]
    weak_family_members: list[str]
    spike_injected: list[str]
    detector_window: int = 14
    detector_z_max: float = 3.5

    def to_wire(self) -> dict:
        return {
            "scenario_name": self.scenario_name,
            "seed": self.seed,
            "days": self.days,
            "start_date": self.start_date.isoformat(),
            "detector_window": self.detector_window,
            "detector_z_max": self.detector_z_max,
            "true_labels": self.true_labels,
            "daily_total": self.daily_total,
            "daily_by_kind": self.daily_by_kind,
            "fault_windows": self.fault_windows,
            "expected_anomalies": self.expected_anomalies,
            "weak_family_members": self.weak_family_members,
            "spike_injected": self.spike_injected,
        }

    @classmethod
    def from_wire(cls, raw: dict) -> "GroundTruthManifest":
        return cls(
            scenario_name=raw["scenario_name"],
            seed=raw["seed"],
            days=raw["days"],
            start_date=date.fromisoformat(raw["start_date"]),
            true_labels=raw["true_labels"],
            daily_total=raw["daily_total"],
            daily_by_kind=raw["daily_by_kind"],
            fault_windows=raw["fault_windows"],
            expected_anomalies=raw["expected_anomalies"],
            weak_family_members=raw["weak_family_members"],
            spike_injected=raw["spike_injected"],
            detector_window=raw["detector_window"],
            detector_z_max=raw["detector_z_max"],
        )


def _rng(seed: int, index: int, channel: int) -> np.random.Generator:
    key = [np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64((channel << 48) | index)]
    return np.random.Generator(np.random.Philox(key=key))


def _weighted_choice(rng: np.random.Generator, table) -> str:
    u = rng.random()
    acc = 0.0
    for value, weight in table:
        acc += weight
        if u < acc:
            return value
    return table[-1][0]


def _artifact_id(seed: int, index: int) -> str:
    return hashlib.sha256(f"aitotal:{seed}:{index}".encode()).hexdigest()


class _Generated:
    __slots__ = ("wire", "true_label", "kind", "day", "weak_member", "injected")

    def __init__(self, wire, true_label, kind, day, weak_member, injected):
        self.wire = wire
        self.true_label = true_label
        self.kind = kind
        self.day = day
        self.weak_member = weak_member
        self.injected = injected


def _generate_artifact(
    spec: ScenarioSpec,
    index: int,
    day: int,
    injected_by: Optional[FaultSpec] = None,
) -> _Generated:
    base = _rng(spec.seed, index, _CH_BASE)
    obs_rng = _rng(spec.seed, index, _CH_ENGINES)
    fault_rng = _rng(spec.seed, index, _CH_FAULT)
    ingest_day = spec.start_date + timedelta(days=day)

    if injected_by is not None:
        kind = injected_by.target_kind or ArtifactKind.OTHER
        file_type: Optional[str] = injected_by.target
        base.random()  # keep stream layout aligned with the baseline path
        base.random()
    else:
        kind = ArtifactKind(_weighted_choice(base, [(k.value, w) for k, w in _KIND_WEIGHTS.items()]))
        file_type = _weighted_choice(base, _FILE_TYPES[kind])
        if base.random() < 0.02:
            file_type = None

    source_feed = _weighted_choice(base, _SOURCE_FEEDS)
    malicious = bool(base.random() < spec.malicious_rate)

    if malicious:
        prevalence = 1 + int(base.geometric(0.5))
        age_days = int(base.geometric(0.15)) - 1
        endpoint_count = 1 + int(base.geometric(0.2))
    else:
        if base.random() < 0.6:
            prevalence = 100 + int(base.geometric(0.02))
            age_days = 30 + int(base.geometric(0.05))
        else:
            prevalence = 1 + int(base.geometric(0.25))
            age_days = int(base.geometric(0.2)) - 1
        endpoint_count = int(base.geometric(0.3)) - 1
    age_days = max(age_days, 0)
    endpoint_count = max(endpoint_count, 0)

    signature_match = malicious and base.random() < 0.15
    u_sandbox = base.random()
    if malicious:
        sandbox = (SandboxVerdict.MALICIOUS if u_sandbox < 0.25
                   else SandboxVerdict.BENIGN if u_sandbox < 0.30 else SandboxVerdict.NOT_RUN)
    else:
        # sandbox detonation false-positives are the main source of label
        # noise in the stream; without them the derived labels collapse to
        # a clean relay of the true labels
        sandbox = (SandboxVerdict.MALICIOUS if u_sandbox < 0.02
                   else SandboxVerdict.BENIGN if u_sandbox < 0.20 else SandboxVerdict.NOT_RUN)

    pool = _FAMILIES[kind]
    family = pool[int(base.integers(0, len(pool)))] if malicious else None
    benign_fp_family = "generic-riskware" if base.random() < 0.5 else None

    full_sources = base.random() >= 0.03
    if full_sources:
        sources = list(_EXPECTED_SOURCES)
    else:
        drop = int(base.integers(0, len(_EXPECTED_SOURCES)))
        sources = [s for i, s in enumerate(_EXPECTED_SOURCES) if i != drop]

    # fault channel draws happen in a fixed order so toggling one fault
    # kind cannot shift another fault's randomness
    u_weak = fault_rng.random()
    u_label_outage = fault_rng.random()
    coverage_u = {e.engine_id: fault_rng.random() for e in spec.engines}

    weak_member = False
    score_cap: Optional[float] = None
    score_shift = 0.0
    vendors_down = False
    engines_down: set[str] = set()
    for fault in spec.faults:
        if not fault.active(day):
            continue
        if fault.kind is FaultKind.WEAK_FAMILY and malicious and injected_by is None:
            if fault.target_kind is None or fault.target_kind is kind:
                if u_weak < fault.magnitude:
                    weak_member = True
                    family = fault.target
        elif fault.kind is FaultKind.LABEL_OUTAGE:
            if u_label_outage < fault.magnitude:
                vendors_down = True
        elif fault.kind is FaultKind.COVERAGE_LOSS and fault.target is not None:
            if coverage_u.get(fault.target, 1.0) < fault.magnitude:
                engines_down.add(fault.target)
        elif fault.kind is FaultKind.CONCEPT_DRIFT and malicious:
            if fault.target_kind is None or fault.target_kind is kind:
                span = max(fault.end_day - fault.start_day, 1)
                score_shift = fault.magnitude * (day - fault.start_day) / span

    if weak_member:
        # capped strictly below every model's default threshold
        caps = [e.default_threshold for e in spec.engines
                if e.kind is EngineKind.INTERNAL_MODEL and e.default_threshold is not None]
        score_cap = 0.9 * min(caps)

    observations = []
    naming_vendors: list[str] = []
    fp_naming_vendors: list[str] = []
    alpha, beta = spec.mal_score_beta if malicious else spec.ben_score_beta
    for engine in spec.engines:
        u_scan = obs_rng.random()
        u_value = obs_rng.random()
        score_value = obs_rng.beta(alpha, beta)
        if engine.kind is EngineKind.INTERNAL_MODEL:
            if engine.model_type is not kind:
                continue
            if injected_by is not None and injected_by.kind is FaultKind.VOLUME_SPIKE:
                continue  # the surge is precisely the data the model never scans
            scanned = u_scan < 0.96 and engine.engine_id not in engines_down
            if not scanned:
                observations.append({"engine": engine.engine_id, "scanned": False,
                                     "score": None, "verdict": None, "scan_ts": None})
                continue
            score = float(score_value)
            if malicious:
                score = max(0.0, score - score_shift)
                if score_cap is not None:
                    score = min(score, score_cap)
            observations.append({
                "engine": engine.engine_id, "scanned": True,
                "score": round(score, 6), "verdict": None,
                "scan_ts": ingest_day.isoformat(),
            })
        else:
            propensity = 0.9 if engine.kind is EngineKind.VENDOR else 0.8
            scanned = u_scan < propensity and engine.engine_id not in engines_down
            if engine.kind is EngineKind.VENDOR and vendors_down:
                scanned = False
            if not scanned:
                observations.append({"engine": engine.engine_id, "scanned": False,
                                     "score": None, "verdict": None, "scan_ts": None})
                continue
            if engine.kind is EngineKind.VENDOR:
                p_malicious = (spec.vendor_accuracy_malicious if malicious
                               else 1.0 - spec.vendor_accuracy_benign)
            else:
                p_malicious = 0.85 if malicious else 0.08
            verdict = Verdict.MALICIOUS if u_value < p_malicious else Verdict.BENIGN
            observations.append({
                "engine": engine.engine_id, "scanned": True,
                "score": None, "verdict": verdict.value,
                "scan_ts": ingest_day.isoformat(),
            })
            if verdict is Verdict.MALICIOUS and engine.kind is EngineKind.VENDOR:
                if malicious:
                    naming_vendors.append(engine.engine_id)
                else:
                    fp_naming_vendors.append(engine.engine_id)

    families = []
    if malicious and family is not None:
        for vendor_id in naming_vendors[:3]:
            families.append({"vendor": vendor_id, "name": family})
    elif not malicious and benign_fp_family is not None:
        for vendor_id in fp_naming_vendors[:2]:
            families.append({"vendor": vendor_id, "name": benign_fp_family})

    wire = {
        "artifact_id": _artifact_id(spec.seed, index),
        "kind": kind.value,
        "file_type": file_type,
        "source_feed": source_feed,
        "first_seen": (ingest_day - timedelta(days=age_days)).isoformat(),
        "ingest_day": ingest_day.isoformat(),
        "prevalence": prevalence,
        "age_days": age_days,
        "endpoint_count": endpoint_count,
        "signature_match": signature_match,
        "sandbox_verdict": sandbox.value,
        "families": families,
        "sources_present": sources,
        "observations": observations,
    }
    return _Generated(
        wire=wire,
        true_label="Malicious" if malicious else "Benign",
        kind=kind,
        day=day,
        weak_member=weak_member,
        injected=injected_by is not None,
    )


def _iter_artifacts(spec: ScenarioSpec) -> Iterator[_Generated]:
    spikes = [f for f in spec.faults if f.kind is FaultKind.VOLUME_SPIKE]
    outages = [f for f in spec.faults if f.kind is FaultKind.FEED_OUTAGE]
    for day in range(spec.days):
        volume = spec.base_daily_volume
        for outage in outages:
            if outage.active(day):
                volume = int(round(volume * (1.0 - outage.magnitude)))
        for slot in range(volume):
            yield _generate_artifact(spec, day * spec.base_daily_volume + slot, day)
        for spike_no, spike in enumerate(spikes):
            if not spike.active(day):
                continue
            extra = int(round(spike.magnitude * spec.base_daily_volume))
            for j in range(extra):
                index = _SPIKE_INDEX_BASE + (spike_no << 32) + day * 100_000 + j
                yield _generate_artifact(spec, index, day, injected_by=spike)


def _oracle_anomaly_days(
    counts: list[int], start_date: date, window: int, z_max: float
) -> list[dict]:
    """Independent median/MAD reimplementation used only for expectations."""
    flags = []
    values = np.asarray(counts, dtype=float)
    for i in range(window, len(values)):
        trailing = values[i - window:i]
        med = float(np.median(trailing))
        mad = float(np.median(np.abs(trailing - med)))
        x = float(values[i])
        if mad == 0.0:
            z = 0.0 if x == med else math.copysign(math.inf, x - med)
        else:
            z = (x - med) / (1.4826 * mad)
        day = (start_date + timedelta(days=i)).isoformat()
        if z > z_max:
            flags.append({"day": day, "direction": "Spike"})
        elif z < -z_max:
            flags.append({"day": day, "direction": "Drop"})
        if x == 0 and med > 0:
            flags.append({"day": day, "direction": "ZeroVolume"})
    return flags


def generate(
    spec: ScenarioSpec, scenario_name: str = "custom"
) -> tuple[list[str], GroundTruthManifest]:
    """Produce the JSONL lines and the ground-truth manifest for a scenario.

    Deterministic: the same spec yields byte-identical lines on every
    run. Every line is guaranteed to pass core.validate_record.
    """
    lines: list[str] = []
    true_labels: dict[str, str] = {}
    daily_total = [0] * spec.days
    daily_by_kind: dict[str, list[int]] = {k.value: [0] * spec.days for k in ArtifactKind}
    weak_members: list[str] = []
    spike_injected: list[str] = []

    for generated in _iter_artifacts(spec):
        record, errors = validate_record(generated.wire)
        if errors:  # a generator bug, not a data condition
            raise AssertionError(f"generated invalid record: {errors}")
        lines.append(json.dumps(record_to_wire(record), separators=(",", ":")))
        artifact_id = generated.wire["artifact_id"]
        true_labels[artifact_id] = generated.true_label
        daily_total[generated.day] += 1
        daily_by_kind[generated.kind.value][generated.day] += 1
        if generated.weak_member:
            weak_members.append(artifact_id)
        if generated.injected:
            spike_injected.append(artifact_id)

    window, z_max = 14, 3.5
    expected = {
        "volume:total": _oracle_anomaly_days(daily_total, spec.start_date, window, z_max),
    }
    manifest = GroundTruthManifest(
        scenario_name=scenario_name,
        seed=spec.seed,
        days=spec.days,
        start_date=spec.start_date,
        true_labels=true_labels,
        daily_total=daily_total,
        daily_by_kind=daily_by_kind,
        fault_windows=[{
            "kind": f.kind.value,
            "start_day": f.start_day,
            "end_day": f.end_day,
            "magnitude": f.magnitude,
            "target": f.target,
            "target_kind": f.target_kind.value if f.target_kind else None,
        } for f in spec.faults],
        expected_anomalies=expected,
        weak_family_members=sorted(weak_members),
        spike_injected=sorted(spike_injected),
        detector_window=window,
        detector_z_max=z_max,
    )
    return lines, manifest


# ----------------------------------------------------------------------
# Built-in scenarios and wire parsing
# ----------------------------------------------------------------------

def standard_engines() -> list[Engine]:
    """Registry used by the built-in scenarios: 3 models, 5 vendors, 1 reputation."""
    return [
        Engine("PE_20200930", EngineKind.INTERNAL_MODEL,
               model_type=ArtifactKind.PE, version="PE_20200930", default_threshold=0.5),
        Engine("OFFICE_20200915", EngineKind.INTERNAL_MODEL,
               model_type=ArtifactKind.OFFICE, version="OFFICE_20200915", default_threshold=0.5),
        Engine("PDF_20200901", EngineKind.INTERNAL_MODEL,
               model_type=ArtifactKind.PDF, version="PDF_20200901", default_threshold=0.5),
        Engine("vendor-alpha", EngineKind.VENDOR, vote_weight=1.0),
        Engine("vendor-bravo", EngineKind.VENDOR, vote_weight=1.0),
        Engine("vendor-charlie", EngineKind.VENDOR, vote_weight=1.0),
        Engine("vendor-delta", EngineKind.VENDOR, vote_weight=1.0),
        Engine("vendor-echo", EngineKind.VENDOR, vote_weight=1.0),
        Engine("rep-internal", EngineKind.REPUTATION),
    ]


def builtin_scenario(name: str) -> ScenarioSpec:
    engines = standard_engines()
    scenarios = {
        "baseline": ScenarioSpec(
            seed=20200930, days=30, base_daily_volume=400, engines=engines),
        "feed-outage": ScenarioSpec(
            seed=20200701, days=60, base_daily_volume=500, engines=engines,
            faults=[FaultSpec(FaultKind.FEED_OUTAGE, 30, 37, 1.0)]),
        "office-surge": ScenarioSpec(
            seed=20200715, days=60, base_daily_volume=500, engines=engines,
            faults=[FaultSpec(FaultKind.VOLUME_SPIKE, 40, 59, 2.0,
                              target="Excel-OPC", target_kind=ArtifactKind.OFFICE)]),
        "label-outage": ScenarioSpec(
            seed=20200801, days=45, base_daily_volume=400, engines=engines,
            faults=[FaultSpec(FaultKind.LABEL_OUTAGE, 25, 32, 1.0)]),
        "coverage-loss": ScenarioSpec(
            seed=20200815, days=45, base_daily_volume=400, engines=engines,
            faults=[FaultSpec(FaultKind.COVERAGE_LOSS, 20, 35, 0.8,
                              target="OFFICE_20200915")]),
        "weak-family": ScenarioSpec(
            seed=20200901, days=45, base_daily_volume=500, engines=engines,
            faults=[FaultSpec(FaultKind.WEAK_FAMILY, 10, 40, 0.5,
                              target="RDN/Generic.cf", target_kind=ArtifactKind.PDF)]),
        "concept-drift": ScenarioSpec(
            seed=20200915, days=60, base_daily_volume=400, engines=engines,
            faults=[FaultSpec(FaultKind.CONCEPT_DRIFT, 30, 59, 0.35,
                              target_kind=ArtifactKind.PE)]),
    }
    scenarios["volume-spike"] = scenarios["office-surge"]
    if name not in scenarios:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(scenarios)}")
    return scenarios[name]


BUILTIN_SCENARIOS = (
    "baseline", "feed-outage", "office-surge", "volume-spike",
    "label-outage", "coverage-loss", "weak-family", "concept-drift",
)


def scenario_from_wire(raw: dict) -> ScenarioSpec:
    """Parse a ScenarioSpec from a TOML/JSON document (engines optional)."""
    from .config import parse_engines  # shared registry table format

    faults = []
    for item in raw.get("faults", []):
        faults.append(FaultSpec(
            kind=FaultKind(item["kind"]),
            start_day=int(item["start_day"]),
            end_day=int(item["end_day"]),
            magnitude=float(item["magnitude"]),
            target=item.get("target"),
            target_kind=ArtifactKind(item["target_kind"]) if item.get("target_kind") else None,
        ))
    engines = parse_engines(raw["engines"]) if raw.get("engines") else standard_engines()
    spec = ScenarioSpec(
        seed=int(raw["seed"]),
        days=int(raw["days"]),
        base_daily_volume=int(raw["base_daily_volume"]),
        engines=engines,
        faults=faults,
    )
    if raw.get("start_date"):
        spec.start_date = date.fromisoformat(raw["start_date"])
    if raw.get("malicious_rate") is not None:
        spec.malicious_rate = float(raw["malicious_rate"])
    return spec
