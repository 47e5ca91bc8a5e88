"""Family canonicalization, breakdown tallies, table filter/sort, color buckets."""
import random

import pytest

from aitotal.breakdown import (
    GroupBy,
    breakdown,
    canonical_family,
    color_bucket,
    filter_sort,
)
from aitotal.core import ArtifactKind, Engine, EngineKind, Label, SandboxVerdict
from aitotal.store import QuerySpec

from conftest import DAY, obs, record

MODEL = Engine("model-pe", EngineKind.INTERNAL_MODEL, model_type=ArtifactKind.PE,
               version="PE_20200930", default_threshold=0.5)


def rows_for(store_factory, records):
    store = store_factory(records)
    spec = QuerySpec(time_from=DAY, time_to=DAY, model_type=ArtifactKind.PE,
                     model_versions=frozenset({"model-pe"}))
    return store.select(spec)


def mal_record(n, family=None, score=None, file_type="PE32", endpoints=0, scanned=True):
    observations = ()
    if scanned and score is not None:
        observations = (obs("model-pe", score=score),)
    families = tuple(("v" + str(i + 1), family) for i in range(2)) if family else ()
    return record(n, sandbox_verdict=SandboxVerdict.MALICIOUS, observations=observations,
                  family_names=families, file_type=file_type, endpoint_count=endpoints)


def ben_record(n, family=None, score=None, file_type="PE32"):
    observations = (obs("model-pe", score=score),) if score is not None else ()
    families = (("v1", family),) if family else ()
    return record(n, prevalence=500, age_days=90, observations=observations,
                  family_names=families, file_type=file_type)


class TestCanonicalFamily:
    def test_majority(self):
        name, vendors = canonical_family([("v1", "emotet"), ("v2", "emotet"), ("v3", "trickbot")])
        assert name == "emotet"
        assert vendors == {"v1", "v2", "v3"}

    def test_empty(self):
        assert canonical_family([]) == ("<unnamed>", frozenset())

    def test_lexicographic_tie_break(self):
        name, vendors = canonical_family([("v1", "a"), ("v2", "b")])
        assert name == "a"
        assert vendors == {"v1", "v2"}


class TestBreakdown:
    def test_hand_counted_group(self, store_factory):
        records = [mal_record(i, "emotet", score=0.9 if i <= 9 else 0.1)
                   for i in range(1, 11)]
        rows = rows_for(store_factory, records)
        [row] = breakdown(rows, MODEL)
        assert (row.detected, row.missed) == (9, 1)
        assert row.detection_ratio == pytest.approx(0.9)

    def test_benign_only_group_undefined_ratio(self, store_factory):
        rows = rows_for(store_factory, [ben_record(1, "pua.x"), ben_record(2, "pua.x")])
        [row] = breakdown(rows, MODEL)
        assert (row.detected, row.missed) == (0, 0)
        assert row.detection_ratio is None
        assert row.total_samples == 2

    def test_unscanned_malicious_counts_missed(self, store_factory):
        # 5 malicious Excel rows: model scans 2 (detects both), never sees 3
        records = [mal_record(i, None, score=0.9, file_type="Excel-OPC") for i in (1, 2)]
        records += [mal_record(i, None, file_type="Excel-OPC", scanned=False)
                    for i in (3, 4, 5)]
        rows = rows_for(store_factory, records)
        [row] = breakdown(rows, MODEL, group_by=GroupBy.FILE_TYPE)
        assert row.group_key == "Excel-OPC"
        assert (row.detected, row.missed) == (2, 3)
        assert row.detection_ratio == pytest.approx(0.4)

    def test_missing_filetype_grouped_as_unknown(self, store_factory):
        rows = rows_for(store_factory, [mal_record(1, file_type=None, score=0.9)])
        [row] = breakdown(rows, MODEL, group_by=GroupBy.FILE_TYPE)
        assert row.group_key == "<unknown>"

    def test_endpoints_sum_malicious_only(self, store_factory):
        records = [mal_record(1, "emotet", score=0.9, endpoints=7),
                   mal_record(2, "emotet", score=0.1, endpoints=5)]
        ben = ben_record(3, "emotet")
        rows = rows_for(store_factory, records + [ben])
        [row] = breakdown(rows, MODEL)
        assert row.endpoints == 12
        assert row.total_samples == 3
        assert row.total_malicious == 2

    def test_groups_partition_selection(self, store_factory):
        rng = random.Random(3)
        records = []
        for i in range(1, 60):
            fam = rng.choice(["emotet", "trickbot", None])
            if rng.random() < 0.5:
                records.append(mal_record(i, fam, score=round(rng.random(), 2)))
            else:
                records.append(ben_record(i, fam, score=round(rng.random(), 2)))
        rows = rows_for(store_factory, records)
        table = breakdown(rows, MODEL)
        assert sum(r.total_samples for r in table) == len(rows)
        by_type = breakdown(rows, MODEL, group_by=GroupBy.FILE_TYPE)
        assert sum(r.total_samples for r in by_type) == len(rows)

    def test_detected_sum_is_unconditioned_tp(self, store_factory):
        rng = random.Random(4)
        records = []
        for i in range(1, 80):
            fam = rng.choice(["a", "b", "c", None])
            scanned = rng.random() < 0.7
            records.append(mal_record(i, fam, score=round(rng.random(), 2) if scanned else None,
                                      scanned=scanned))
        rows = rows_for(store_factory, records)
        table = breakdown(rows, MODEL)
        from aitotal.metrics import compute_metrics
        m = compute_metrics(rows, [MODEL])[0]
        # breakdown counts a detection only among scanned rows, so the sums agree
        assert sum(r.detected for r in table) == m.tp
        labeled_mal = sum(1 for r in rows if r.label.label is Label.MALICIOUS)
        assert sum(r.missed for r in table) == labeled_mal - m.tp

    def test_single_group_equals_whole_aggregate(self, store_factory):
        records = [mal_record(i, "solo", score=0.9 if i % 2 else 0.2) for i in range(1, 9)]
        rows = rows_for(store_factory, records)
        [row] = breakdown(rows, MODEL)
        assert row.total_samples == len(rows)
        assert row.detected + row.missed == len(rows)


class TestFilterSort:
    @pytest.fixture
    def table(self, store_factory):
        records = [
            mal_record(1, "emotet.x", score=0.9),
            mal_record(2, "emotet.x", score=0.1),
            mal_record(3, "trickbot", score=0.1),
            mal_record(4, "trickbot", score=0.2),
            mal_record(5, "qakbot", score=0.9),
        ]
        records.append(ben_record(6, "zeta-pua"))
        return breakdown(rows_for(store_factory, records), MODEL)

    def test_substring_case_insensitive(self, table):
        result = filter_sort(table, substring="EMOTET")
        assert [r.group_key for r in result] == ["emotet.x"]

    def test_empty_substring_identity(self, table):
        assert filter_sort(table, substring="") == filter_sort(table, substring=None)

    def test_sort_missed_descending(self, table):
        result = filter_sort(table, sort_key="missed", descending=True)
        missed = [r.missed for r in result if r.detection_ratio is not None]
        assert missed == sorted(missed, reverse=True)
        assert result[0].group_key == "trickbot"

    def test_undefined_ratio_last_both_directions(self, table):
        asc = filter_sort(table, sort_key="detection_ratio")
        desc = filter_sort(table, sort_key="detection_ratio", descending=True)
        assert asc[-1].group_key == "zeta-pua"
        assert desc[-1].group_key == "zeta-pua"

    def test_ties_break_by_group_key_ascending(self, table):
        desc = filter_sort(table, sort_key="total_samples", descending=True)
        two_sample_groups = [r.group_key for r in desc if r.total_samples == 2]
        assert two_sample_groups == sorted(two_sample_groups)

    def test_contents_never_altered(self, table):
        result = filter_sort(table, sort_key="detected", descending=True)
        assert sorted(result, key=lambda r: r.group_key) == sorted(
            table, key=lambda r: r.group_key)

    def test_unknown_sort_key(self, table):
        with pytest.raises(ValueError):
            filter_sort(table, sort_key="bogus")


class TestColorBucket:
    def test_top_bin(self):
        assert color_bucket(1.0) == 6

    def test_bottom_bin(self):
        assert color_bucket(0.0) == 0

    def test_midpoint_against_bin_edges(self):
        # floor(0.5 * 7) = 3; verify against explicit edge enumeration
        edges = [(i / 7, (i + 1) / 7) for i in range(7)]
        expected = next(i for i, (lo, hi) in enumerate(edges) if lo <= 0.5 < hi)
        assert color_bucket(0.5) == expected == 3

    def test_undefined_is_none(self):
        assert color_bucket(None) is None

    def test_every_edge(self):
        for i in range(7):
            assert color_bucket(i / 7) == i
        for ratio in (0.999999, 6 / 7 + 1e-9):
            assert color_bucket(ratio) == 6

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            color_bucket(1.5)
