"""Derive evolving ground-truth labels from internal evidence and vendor votes.

The label of an artifact is a function of the evidence available *as of
a date*: handwritten-signature hits and sandbox detonations override
everything, old highly-prevalent artifacts default to benign, and the
remaining cases are decided by a weighted majority vote over external
vendor verdicts. Internal models never participate, so a model is never
evaluated against labels it helped produce.

Labels are pure functions of (artifact, vendors, policy, as_of); they
change as new observations arrive, which is why the store recomputes
them per query instead of caching.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date

from .core import (
    ArtifactRecord,
    Engine,
    EngineKind,
    Label,
    LabelReason,
    LabelRecord,
    SandboxVerdict,
    Verdict,
)


@dataclass(frozen=True)
class LabelPolicy:
    """Thresholds for the labeling rules.

    quorum: minimum vendors that must have scanned before a vote-based
    label is trusted. Vote scores at/above tau_malicious label
    Malicious, at/below tau_benign label Benign; the gap in between is
    Contested. Ties resolve toward detection (>= / <=).
    """

    quorum: int = 3
    tau_malicious: float = 0.5
    tau_benign: float = 0.2
    benign_prevalence_min: int = 100
    benign_age_min_days: int = 30

    def __post_init__(self):
        if self.quorum < 1:
            raise ValueError("quorum must be positive")
        if not 0.0 < self.tau_malicious <= 1.0:
            raise ValueError("tau_malicious must be in (0,1]")
        if not 0.0 <= self.tau_benign < 1.0:
            raise ValueError("tau_benign must be in [0,1)")
        if self.tau_benign >= self.tau_malicious:
            raise ValueError("tau_benign must be < tau_malicious")


def vote_score(artifact: ArtifactRecord, vendors: list[Engine], as_of: date) -> tuple[float, int]:
    """Weighted malicious fraction over vendors that scanned by as_of.

    Returns (score, n_voting). Only observations with scanned=True and
    scan_ts <= as_of count; score is 0.0 with n_voting=0 when nobody
    voted. The score is a ratio, so rescaling all weights by a common
    factor leaves it unchanged.
    """
    total_weight = 0.0
    malicious_weight = 0.0
    n_voting = 0
    for vendor in vendors:
        if vendor.kind is not EngineKind.VENDOR:
            raise ValueError(f"{vendor.engine_id} is not a vendor")
        obs = artifact.observation_for(vendor.engine_id)
        if obs is None or not obs.scanned or obs.verdict is None:
            continue
        if obs.scan_ts > as_of:
            continue
        n_voting += 1
        total_weight += vendor.vote_weight
        if obs.verdict is Verdict.MALICIOUS:
            malicious_weight += vendor.vote_weight
    if n_voting == 0:
        return 0.0, 0
    return malicious_weight / total_weight, n_voting


def label(
    artifact: ArtifactRecord,
    vendors: list[Engine],
    policy: LabelPolicy,
    as_of: date,
) -> LabelRecord:
    """Label one artifact as of a date.

    Rule order (first match wins):
      1. signature match         -> Malicious / SignatureOverride
      2. sandbox says Malicious  -> Malicious / SandboxOverride
      3. prevalent, old, and not voted malicious -> Benign / PrevalenceBenign
      4. fewer than quorum voters -> Unlabeled / NoQuorum
      5. vote >= tau_malicious -> Malicious; vote <= tau_benign -> Benign;
         otherwise Unlabeled / Contested.

    Overrides come before votes: signatures are the strongest internal
    evidence. Sandbox Benign verdicts deliberately do not force Benign.
    """
    score, n_voting = vote_score(artifact, vendors, as_of)
    reported_score = score if n_voting > 0 else None

    def result(value: Label, reason: LabelReason) -> LabelRecord:
        return LabelRecord(
            artifact_id=artifact.artifact_id,
            as_of=as_of,
            label=value,
            reason=reason,
            vote_score=reported_score,
        )

    if artifact.signature_match:
        return result(Label.MALICIOUS, LabelReason.SIGNATURE_OVERRIDE)
    if artifact.sandbox_verdict is SandboxVerdict.MALICIOUS:
        return result(Label.MALICIOUS, LabelReason.SANDBOX_OVERRIDE)
    if (artifact.prevalence >= policy.benign_prevalence_min
            and artifact.age_days >= policy.benign_age_min_days
            and score < policy.tau_malicious):
        return result(Label.BENIGN, LabelReason.PREVALENCE_BENIGN)
    if n_voting < policy.quorum:
        return result(Label.UNLABELED, LabelReason.NO_QUORUM)
    if score >= policy.tau_malicious:
        return result(Label.MALICIOUS, LabelReason.VENDOR_VOTE)
    if score <= policy.tau_benign:
        return result(Label.BENIGN, LabelReason.VENDOR_VOTE)
    return result(Label.UNLABELED, LabelReason.CONTESTED)
