"""Model Metrics computations: confusion counts, rates, sample ratios, ROC.

TPR and FPR are conditioned on the set of rows each engine actually
scanned; an engine is never punished in its rates for data it did not
see. Coverage deficits surface separately through the per-label sample
ratios and the low-coverage warning flag (the dashboard's red border),
so the two effects stay distinguishable. The breakdown module uses the
opposite convention on purpose (unscanned counts as missed there).

Undefined rates (zero denominator) are reported as None, never as 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta
from enum import Enum
from typing import TYPE_CHECKING, Optional

from .core import Engine, EngineKind, EngineObservation, Label, Verdict

if TYPE_CHECKING:
    from .store import WideRow

LABEL_CLASSES = (Label.MALICIOUS, Label.BENIGN, Label.UNLABELED)


class Classification(str, Enum):
    MALICIOUS = "Malicious"
    BENIGN = "Benign"
    UNSCANNED = "Unscanned"


@dataclass(frozen=True)
class EngineMetrics:
    """One engine's confusion counts and coverage picture over a selection."""

    engine_id: str
    tp: int
    fp: int
    tn: int
    fn: int
    unscanned: int
    tpr: Optional[float]
    fpr: Optional[float]
    sample_ratio: dict[Label, Optional[float]]
    low_coverage_warning: bool

    @property
    def n_labeled(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class RocPoint:
    threshold: float  # math.inf marks the above-every-score sentinel
    fpr: float
    tpr: float


@dataclass(frozen=True)
class RocCurve:
    """Threshold sweep of one model, thresholds descending, (0,0) to (1,1)."""

    points: tuple[RocPoint, ...]

    @property
    def auc(self) -> float:
        area = 0.0
        for prev, cur in zip(self.points, self.points[1:]):
            area += (cur.fpr - prev.fpr) * (cur.tpr + prev.tpr) / 2.0
        return area


@dataclass(frozen=True)
class TimeSeriesPoint:
    """One day of one engine; tpr/fpr are None on gap days."""

    day: date
    tpr: Optional[float]
    fpr: Optional[float]
    n_labeled: int


def classify(
    obs: Optional[EngineObservation], engine: Engine, threshold: Optional[float]
) -> Classification:
    """Decide Malicious/Benign/Unscanned for one observation.

    Internal models compare score >= threshold (score exactly at the
    threshold counts as detected). Vendors and reputation engines
    return their verdict directly; threshold is ignored for them.
    """
    if obs is None or not obs.scanned:
        return Classification.UNSCANNED
    if engine.kind is EngineKind.INTERNAL_MODEL:
        if threshold is None or not 0.0 <= threshold <= 1.0:
            raise ValueError(f"threshold must be in [0,1], got {threshold}")
        return Classification.MALICIOUS if obs.score >= threshold else Classification.BENIGN
    return Classification.MALICIOUS if obs.verdict is Verdict.MALICIOUS else Classification.BENIGN


def _engine_threshold(engine: Engine, threshold: Optional[float]) -> Optional[float]:
    if engine.kind is not EngineKind.INTERNAL_MODEL:
        return None
    return threshold if threshold is not None else engine.default_threshold


def compute_metrics(
    rows: "list[WideRow]",
    engines: list[Engine],
    threshold: Optional[float] = None,
    warn_pct: float = 0.5,
    *,
    ratio_rows: "Optional[list[WideRow]]" = None,
) -> list[EngineMetrics]:
    """Per-engine confusion counts, rates and sample ratios over rows.

    threshold=None means each model uses its own default. Confusion
    counts condition on rows the engine scanned with label in
    {Malicious, Benign}; sample ratios and the low-coverage warning are
    computed over ratio_rows when given (the selection before the
    coverage filter), else over the same rows.
    """
    coverage_rows = rows if ratio_rows is None else ratio_rows
    out = []
    for engine in engines:
        eff_threshold = _engine_threshold(engine, threshold)
        tp = fp = tn = fn = unscanned = 0
        for row in rows:
            obs = row.record.observation_for(engine.engine_id)
            decision = classify(obs, engine, eff_threshold)
            if decision is Classification.UNSCANNED:
                unscanned += 1
                continue
            if row.label.label is Label.MALICIOUS:
                if decision is Classification.MALICIOUS:
                    tp += 1
                else:
                    fn += 1
            elif row.label.label is Label.BENIGN:
                if decision is Classification.MALICIOUS:
                    fp += 1
                else:
                    tn += 1

        totals = {cls: 0 for cls in LABEL_CLASSES}
        scanned = {cls: 0 for cls in LABEL_CLASSES}
        scanned_all = 0
        for row in coverage_rows:
            cls = row.label.label
            totals[cls] += 1
            obs = row.record.observation_for(engine.engine_id)
            if obs is not None and obs.scanned:
                scanned[cls] += 1
                scanned_all += 1
        sample_ratio = {
            cls: (scanned[cls] / totals[cls]) if totals[cls] else None
            for cls in LABEL_CLASSES
        }
        warning = bool(coverage_rows) and scanned_all / len(coverage_rows) < warn_pct

        out.append(EngineMetrics(
            engine_id=engine.engine_id,
            tp=tp, fp=fp, tn=tn, fn=fn, unscanned=unscanned,
            tpr=tp / (tp + fn) if tp + fn else None,
            fpr=fp / (fp + tn) if fp + tn else None,
            sample_ratio=sample_ratio,
            low_coverage_warning=warning,
        ))
    return out


def time_series(
    rows: "list[WideRow]",
    engines: list[Engine],
    threshold: Optional[float] = None,
    day_range: Optional[tuple[date, date]] = None,
) -> dict[str, list[TimeSeriesPoint]]:
    """Daily TPR/FPR series per engine over the rows' day span.

    Partitions rows by ingest_day and computes per-day metrics. Days
    with an undefined rate come through as None gaps, never as zeros.
    day_range widens the emitted span (e.g. to the query window) so
    trailing empty days stay visible.
    """
    by_day: dict[date, list] = {}
    for row in rows:
        by_day.setdefault(row.ingest_day, []).append(row)
    if day_range is None:
        if not by_day:
            return {e.engine_id: [] for e in engines}
        day_range = (min(by_day), max(by_day))
    first, last = day_range

    series: dict[str, list[TimeSeriesPoint]] = {e.engine_id: [] for e in engines}
    day = first
    while day <= last:
        day_metrics = compute_metrics(by_day.get(day, []), engines, threshold)
        for m in day_metrics:
            series[m.engine_id].append(
                TimeSeriesPoint(day=day, tpr=m.tpr, fpr=m.fpr, n_labeled=m.n_labeled)
            )
        day += timedelta(days=1)
    return series


def roc(rows: "list[WideRow]", model: Engine) -> Optional[RocCurve]:
    """Score-threshold sweep for one internal model.

    Sweeps the distinct observed scores (descending) plus an
    above-everything sentinel and 0, deduplicating repeated (fpr, tpr)
    points. Returns None when the scanned-and-labeled rows contain no
    Malicious or no Benign example: the curve is undefined, not flat.
    """
    if model.kind is not EngineKind.INTERNAL_MODEL:
        raise ValueError(f"{model.engine_id} is not an internal model")
    scored: list[tuple[float, bool]] = []  # (score, is_malicious)
    for row in rows:
        if row.label.label not in (Label.MALICIOUS, Label.BENIGN):
            continue
        obs = row.record.observation_for(model.engine_id)
        if obs is None or not obs.scanned or obs.score is None:
            continue
        scored.append((obs.score, row.label.label is Label.MALICIOUS))
    n_pos = sum(1 for _, m in scored if m)
    n_neg = len(scored) - n_pos
    if n_pos < 1 or n_neg < 1:
        return None

    scored.sort(key=lambda s: -s[0])
    thresholds = [float("inf")]
    for score, _ in scored:
        if score != thresholds[-1]:
            thresholds.append(score)
    if thresholds[-1] != 0.0:
        thresholds.append(0.0)

    points: list[RocPoint] = []
    tp = fp = 0
    i = 0
    for threshold in thresholds:
        # everything with score >= threshold is classified malicious
        while i < len(scored) and scored[i][0] >= threshold:
            if scored[i][1]:
                tp += 1
            else:
                fp += 1
            i += 1
        point = RocPoint(threshold=threshold, fpr=fp / n_neg, tpr=tp / n_pos)
        if not points or (point.fpr, point.tpr) != (points[-1].fpr, points[-1].tpr):
            points.append(point)
    return RocCurve(points=tuple(points))
