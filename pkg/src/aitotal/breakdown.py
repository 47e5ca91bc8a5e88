"""Prediction Breakdown: detection tables grouped by malware family or file type.

This is the triage view of real-world exposure, so it deliberately uses
the opposite conditioning from the metrics module: a labeled-malicious
row the model never scanned counts as *missed* here. A parsing bug that
keeps files away from the model should make the affected group light up,
not vanish from its own table.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Optional

from .core import Engine, Label
from .metrics import Classification, _engine_threshold, classify

if TYPE_CHECKING:
    from .store import WideRow

UNNAMED_FAMILY = "<unnamed>"
UNKNOWN_FILETYPE = "<unknown>"

COLOR_BUCKETS = 7  # divergent scale: bucket 0 = orange (low), 6 = blue (high)

SORT_KEYS = ("group_key", "detection_ratio", "detected", "missed", "total_samples", "endpoints")


class GroupBy(str, Enum):
    FAMILY = "family"
    FILE_TYPE = "filetype"


@dataclass(frozen=True)
class BreakdownRow:
    """One family or file-type group with its detection tallies.

    total_samples counts every row in the group regardless of label;
    detected + missed is the labeled-malicious subtotal (also exposed
    as total_malicious so consumers can switch denominators).
    """

    group_key: str
    vendors: frozenset[str]
    detected: int
    missed: int
    total_samples: int
    endpoints: int

    @property
    def total_malicious(self) -> int:
        return self.detected + self.missed

    @property
    def detection_ratio(self) -> Optional[float]:
        denom = self.detected + self.missed
        return self.detected / denom if denom else None


def canonical_family(names: Iterable[tuple[str, str]]) -> tuple[str, frozenset[str]]:
    """Collapse per-vendor family names to one canonical name.

    Majority name wins, ties break lexicographically; the vendor set
    keeps every vendor that supplied any name, so attribution survives
    the merge. No naming vendors at all means "<unnamed>".
    """
    names = list(names)
    if not names:
        return UNNAMED_FAMILY, frozenset()
    counts = Counter(name for _, name in names)
    best = min(counts.items(), key=lambda item: (-item[1], item[0]))
    return best[0], frozenset(vendor for vendor, _ in names)


def breakdown(
    rows: "list[WideRow]",
    model: Engine,
    threshold: Optional[float] = None,
    group_by: GroupBy = GroupBy.FAMILY,
) -> list[BreakdownRow]:
    """Group the selection and tally the model's detections per group.

    detected = labeled-Malicious rows the model classified Malicious;
    missed = the rest of the labeled-Malicious rows, including ones the
    model never scanned. Endpoints sums endpoint_count over the group's
    labeled-Malicious rows only (the column quantifies affected
    machines). Rows come back sorted by group_key.
    """
    eff_threshold = _engine_threshold(model, threshold)
    groups: dict[str, dict] = {}
    for row in rows:
        if group_by is GroupBy.FAMILY:
            key, vendors = canonical_family(row.record.family_names)
        else:
            key = row.record.file_type if row.record.file_type is not None else UNKNOWN_FILETYPE
            vendors = frozenset()
        group = groups.setdefault(
            key, {"vendors": set(), "detected": 0, "missed": 0, "total": 0, "endpoints": 0}
        )
        group["vendors"] |= vendors
        group["total"] += 1
        if row.label.label is Label.MALICIOUS:
            group["endpoints"] += row.record.endpoint_count
            obs = row.record.observation_for(model.engine_id)
            if classify(obs, model, eff_threshold) is Classification.MALICIOUS:
                group["detected"] += 1
            else:
                group["missed"] += 1
    return [
        BreakdownRow(
            group_key=key,
            vendors=frozenset(g["vendors"]),
            detected=g["detected"],
            missed=g["missed"],
            total_samples=g["total"],
            endpoints=g["endpoints"],
        )
        for key, g in sorted(groups.items())
    ]


def filter_sort(
    table: list[BreakdownRow],
    substring: Optional[str] = None,
    sort_key: str = "group_key",
    descending: bool = False,
) -> list[BreakdownRow]:
    """Case-insensitive substring filter on group_key plus a stable sort.

    Rows with an undefined detection ratio always sort last; ties fall
    back to group_key ascending regardless of direction.
    """
    if sort_key not in SORT_KEYS:
        raise ValueError(f"unknown sort_key: {sort_key!r}")
    rows = table
    if substring:
        needle = substring.lower()
        rows = [r for r in rows if needle in r.group_key.lower()]
    rows = sorted(rows, key=lambda r: r.group_key)
    if sort_key == "group_key":
        return list(reversed(rows)) if descending else rows
    defined = [r for r in rows if getattr(r, sort_key) is not None]
    undefined = [r for r in rows if getattr(r, sort_key) is None]
    defined.sort(key=lambda r: getattr(r, sort_key), reverse=descending)
    return defined + undefined


def color_bucket(ratio: Optional[float]) -> Optional[int]:
    """Uniform bin of [0,1] into 7 buckets; None (undefined ratio) stays None.

    Bucket 0 is the low/orange end, 6 the high/blue end; the UI owns
    the actual colors.
    """
    if ratio is None:
        return None
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio out of range [0,1]: {ratio}")
    return min(math.floor(ratio * COLOR_BUCKETS), COLOR_BUCKETS - 1)
