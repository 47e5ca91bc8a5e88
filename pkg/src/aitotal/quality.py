"""Data Quality computations: per-day issue percentages, volumes, anomaly flags.

The anomaly detector is deliberately robust: each day is scored
against the median and MAD of a trailing window (the day itself
excluded), because the very drops and spikes it must catch would
contaminate a mean/stddev baseline. The 14-day default window matches
the dashboard's default two-week view.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, timedelta
from enum import Enum
from statistics import median
from typing import TYPE_CHECKING, Optional

from .core import Engine, Label

if TYPE_CHECKING:
    from .store import WideRow

MAD_SCALE = 1.4826  # makes MAD a consistent sigma estimate under normality

LABEL_CLASSES = (Label.MALICIOUS, Label.BENIGN, Label.UNLABELED)


class AnomalyDirection(str, Enum):
    DROP = "Drop"
    SPIKE = "Spike"
    ZERO_VOLUME = "ZeroVolume"


@dataclass(frozen=True)
class IssueDay:
    """Issue percentages for one day; None on days with no rows (gaps)."""

    day: date
    pct_missing_source: Optional[float]
    pct_unlabeled: Optional[float]
    pct_missing_filetype: Optional[float]


@dataclass(frozen=True)
class AnomalyFlag:
    series_key: str
    day: date
    direction: AnomalyDirection
    robust_z: float  # +-inf when the trailing MAD is 0 but the value moved


@dataclass(frozen=True)
class QualityReport:
    issue_series: tuple[IssueDay, ...]
    volume_series: dict[str, dict[Label, list[tuple[date, int]]]]
    anomalies: tuple[AnomalyFlag, ...]


def _day_span(
    rows: "list[WideRow]", day_range: Optional[tuple[date, date]]
) -> Optional[tuple[date, date]]:
    if day_range is not None:
        return day_range
    if not rows:
        return None
    days = [r.ingest_day for r in rows]
    return min(days), max(days)


def _days_between(first: date, last: date):
    day = first
    while day <= last:
        yield day
        day += timedelta(days=1)


def issue_series(
    rows: "list[WideRow]",
    expected_sources: frozenset[str],
    day_range: Optional[tuple[date, date]] = None,
) -> list[IssueDay]:
    """Per-day percentages of missing-source, unlabeled and missing-filetype rows.

    A row counts as missing-source when its sources_present set does
    not cover every expected source. Days with no rows are emitted as
    gaps (None percentages) so charts show a break, not a zero.
    """
    if not expected_sources:
        raise ValueError("expected_sources must be non-empty")
    span = _day_span(rows, day_range)
    if span is None:
        return []
    by_day: dict[date, list] = {}
    for row in rows:
        by_day.setdefault(row.ingest_day, []).append(row)

    out = []
    for day in _days_between(*span):
        day_rows = by_day.get(day, [])
        n = len(day_rows)
        if n == 0:
            out.append(IssueDay(day, None, None, None))
            continue
        missing_source = sum(
            1 for r in day_rows if not expected_sources <= r.record.sources_present
        )
        unlabeled = sum(1 for r in day_rows if r.label.label is Label.UNLABELED)
        missing_filetype = sum(1 for r in day_rows if r.record.file_type is None)
        out.append(IssueDay(
            day=day,
            pct_missing_source=100.0 * missing_source / n,
            pct_unlabeled=100.0 * unlabeled / n,
            pct_missing_filetype=100.0 * missing_filetype / n,
        ))
    return out


def volume_series(
    rows: "list[WideRow]",
    engines: list[Engine],
    day_range: Optional[tuple[date, date]] = None,
) -> dict[str, dict[Label, list[tuple[date, int]]]]:
    """Per engine and label class, daily counts of rows the engine scanned.

    Zero-filled for every day inside the range, so outages show up as
    zeros rather than missing points.
    """
    span = _day_span(rows, day_range)
    series: dict[str, dict[Label, dict[date, int]]] = {
        e.engine_id: {cls: {} for cls in LABEL_CLASSES} for e in engines
    }
    if span is None:
        return {e.engine_id: {cls: [] for cls in LABEL_CLASSES} for e in engines}
    days = list(_days_between(*span))
    for engine_series in series.values():
        for counts in engine_series.values():
            for day in days:
                counts[day] = 0
    for row in rows:
        cls = row.label.label
        for engine in engines:
            obs = row.record.observation_for(engine.engine_id)
            if obs is not None and obs.scanned:
                series[engine.engine_id][cls][row.ingest_day] += 1
    return {
        engine_id: {cls: sorted(counts.items()) for cls, counts in engine_series.items()}
        for engine_id, engine_series in series.items()
    }


def detect_anomalies(
    series: list[tuple[date, float]],
    window: int = 14,
    z_max: float = 3.5,
    series_key: str = "",
) -> list[AnomalyFlag]:
    """Flag days whose value is a robust outlier against the trailing window.

    For each day with at least `window` trailing points, the robust z
    is (x - median) / (1.4826 * MAD) over the window excluding the day
    itself: Spike above z_max, Drop below -z_max. A day at exactly zero
    while the trailing median is positive additionally flags
    ZeroVolume. When the trailing MAD is 0 the z degenerates: no flag
    if the value sits at the median, +-inf otherwise.

    Series shorter than window+1 produce no flags. The series must be
    chronologically ordered.
    """
    if window < 5:
        raise ValueError("window must be >= 5")
    for (prev_day, _), (day, _) in zip(series, series[1:]):
        if prev_day >= day:
            raise ValueError("series must be chronologically ordered")

    flags: list[AnomalyFlag] = []
    values = [v for _, v in series]
    for i in range(window, len(series)):
        day, x = series[i]
        trailing = values[i - window:i]
        med = median(trailing)
        mad = median([abs(v - med) for v in trailing])
        if mad == 0:
            z = 0.0 if x == med else math.copysign(math.inf, x - med)
        else:
            z = (x - med) / (MAD_SCALE * mad)
        if z > z_max:
            flags.append(AnomalyFlag(series_key, day, AnomalyDirection.SPIKE, z))
        elif z < -z_max:
            flags.append(AnomalyFlag(series_key, day, AnomalyDirection.DROP, z))
        if x == 0 and med > 0:
            flags.append(AnomalyFlag(series_key, day, AnomalyDirection.ZERO_VOLUME, z))
    return flags


def quality_report(
    rows: "list[WideRow]",
    engines: list[Engine],
    expected_sources: frozenset[str],
    window: int = 14,
    z_max: float = 3.5,
    day_range: Optional[tuple[date, date]] = None,
) -> QualityReport:
    """Assemble the full Data Quality payload for one selection.

    Runs the anomaly detector over the total daily volume, every
    engine+label volume series, and the three issue-metric series (gap
    days compacted out before detection).
    """
    issues = issue_series(rows, expected_sources, day_range)
    volumes = volume_series(rows, engines, day_range)

    anomalies: list[AnomalyFlag] = []
    span = _day_span(rows, day_range)
    if span is not None:
        totals: dict[date, int] = {day: 0 for day in _days_between(*span)}
        for row in rows:
            totals[row.ingest_day] += 1
        anomalies.extend(detect_anomalies(
            sorted(totals.items()), window, z_max, series_key="volume:total"))
    for engine_id, engine_series in volumes.items():
        for cls, points in engine_series.items():
            anomalies.extend(detect_anomalies(
                [(d, float(c)) for d, c in points], window, z_max,
                series_key=f"volume:{engine_id}:{cls.value}"))
    for metric in ("pct_missing_source", "pct_unlabeled", "pct_missing_filetype"):
        points = [(d.day, getattr(d, metric)) for d in issues if getattr(d, metric) is not None]
        anomalies.extend(detect_anomalies(points, window, z_max, series_key=f"issue:{metric}"))

    anomalies.sort(key=lambda f: (f.series_key, f.day, f.direction.value))
    return QualityReport(
        issue_series=tuple(issues),
        volume_series=volumes,
        anomalies=tuple(anomalies),
    )
