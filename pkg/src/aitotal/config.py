"""Service configuration: TOML file plus AITOTAL_* environment overrides."""
from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import ArtifactKind, Engine, EngineKind
from .labeling import LabelPolicy

ENV_PREFIX = "AITOTAL_"

DEFAULT_EXPECTED_SOURCES = ("telemetry", "reputation", "sandbox")


@dataclass
class ServiceConfig:
    listen_host: str = "127.0.0.1"
    listen_port: int = 8040
    data_dir: Path = Path("./data")
    static_dir: Optional[Path] = None
    warn_pct: float = 0.5
    anomaly_window: int = 14
    anomaly_z_max: float = 3.5
    expected_sources: frozenset[str] = frozenset(DEFAULT_EXPECTED_SOURCES)
    label_policy: LabelPolicy = field(default_factory=LabelPolicy)
    engines: list[Engine] = field(default_factory=list)

    def __post_init__(self):
        ids = [e.engine_id for e in self.engines]
        if len(ids) != len(set(ids)):
            raise ValueError("engine ids must be unique")
        if not 0.0 <= self.warn_pct <= 1.0:
            raise ValueError("warn_pct must be in [0,1]")


def parse_engines(raw: list[dict]) -> list[Engine]:
    """Parse the [[engines]] registry tables shared by config and scenarios."""
    engines = []
    for item in raw:
        kind = EngineKind(item["kind"])
        engines.append(Engine(
            engine_id=item["id"],
            kind=kind,
            model_type=ArtifactKind(item["model_type"]) if item.get("model_type") else None,
            version=item.get("version", ""),
            default_threshold=item.get("default_threshold"),
            vote_weight=item.get("vote_weight"),
        ))
    return engines


def _config_from_dict(raw: dict) -> ServiceConfig:
    policy_raw = raw.get("label_policy", {})
    policy = LabelPolicy(
        quorum=int(policy_raw.get("quorum", 3)),
        tau_malicious=float(policy_raw.get("tau_malicious", 0.5)),
        tau_benign=float(policy_raw.get("tau_benign", 0.2)),
        benign_prevalence_min=int(policy_raw.get("benign_prevalence_min", 100)),
        benign_age_min_days=int(policy_raw.get("benign_age_min_days", 30)),
    )
    anomaly = raw.get("anomaly", {})
    static_dir = raw.get("static_dir")
    return ServiceConfig(
        listen_host=raw.get("listen_host", "127.0.0.1"),
        listen_port=int(raw.get("listen_port", 8040)),
        data_dir=Path(raw.get("data_dir", "./data")),
        static_dir=Path(static_dir) if static_dir else None,
        warn_pct=float(raw.get("warn_pct", 0.5)),
        anomaly_window=int(anomaly.get("window", 14)),
        anomaly_z_max=float(anomaly.get("z_max", 3.5)),
        expected_sources=frozenset(raw.get("expected_sources", DEFAULT_EXPECTED_SOURCES)),
        label_policy=policy,
        engines=parse_engines(raw.get("engines", [])),
    )


def _apply_env_overrides(raw: dict, environ) -> dict:
    """AITOTAL_<FIELD> overrides for the top-level scalar fields."""
    overrides = {
        "LISTEN_HOST": ("listen_host", str),
        "LISTEN_PORT": ("listen_port", int),
        "DATA_DIR": ("data_dir", str),
        "STATIC_DIR": ("static_dir", str),
        "WARN_PCT": ("warn_pct", float),
    }
    for suffix, (key, cast) in overrides.items():
        value = environ.get(ENV_PREFIX + suffix)
        if value is not None:
            raw[key] = cast(value)
    return raw


def load_config(path: "Path | str | None" = None, environ=None) -> ServiceConfig:
    """Load a ServiceConfig from TOML; missing path means all defaults.

    Environment variables of the form AITOTAL_<FIELD> override the
    corresponding top-level file value.
    """
    raw: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    raw = _apply_env_overrides(raw, os.environ if environ is None else environ)
    return _config_from_dict(raw)


def load_toml(path: "Path | str") -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)
