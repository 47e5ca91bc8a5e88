"""Confusion metrics, time series, ROC sweep vs a brute-force oracle."""
import math
import random
from datetime import date, timedelta

import pytest

from aitotal.core import ArtifactKind, Engine, EngineKind, Label, SandboxVerdict
from aitotal.metrics import (
    Classification,
    classify,
    compute_metrics,
    roc,
    time_series,
)
from aitotal.store import QuerySpec

from conftest import DAY, obs, record


MODEL = Engine("model-pe", EngineKind.INTERNAL_MODEL, model_type=ArtifactKind.PE,
               version="PE_20200930", default_threshold=0.5)
VENDOR = Engine("v1", EngineKind.VENDOR, vote_weight=1.0)


def labeled_rows(store_factory, mal_scores, ben_scores, *, engine="model-pe",
                 mal_scan=None, days=None):
    """Build rows: malicious via sandbox override, benign via prevalence."""
    records = []
    n = 0
    for i, score in enumerate(mal_scores):
        n += 1
        scanned = True if mal_scan is None else mal_scan[i]
        observations = (obs(engine, score=score),) if scanned else ()
        records.append(record(
            n, sandbox_verdict=SandboxVerdict.MALICIOUS, observations=observations,
            ingest_day=DAY if days is None else days[n - 1]))
    for score in ben_scores:
        n += 1
        observations = (obs(engine, score=score),) if score is not None else ()
        records.append(record(
            n, prevalence=500, age_days=90, observations=observations,
            ingest_day=DAY if days is None else days[n - 1]))
    store = store_factory(records)
    last = DAY if days is None else max(days)
    first = DAY if days is None else min(days)
    spec = QuerySpec(time_from=first, time_to=last, model_type=ArtifactKind.PE,
                     model_versions=frozenset({"model-pe"}))
    return store.select(spec)


class TestClassify:
    def test_score_at_threshold_is_malicious(self):
        assert classify(obs("m", score=0.5), MODEL, 0.5) is Classification.MALICIOUS

    def test_threshold_zero_everything_malicious(self):
        for score in (0.0, 0.3, 1.0):
            assert classify(obs("m", score=score), MODEL, 0.0) is Classification.MALICIOUS

    def test_unscanned_regardless_of_threshold(self):
        assert classify(obs("m", scanned=False), MODEL, 0.9) is Classification.UNSCANNED
        assert classify(None, MODEL, 0.9) is Classification.UNSCANNED

    def test_vendor_uses_verdict(self):
        assert classify(obs("v1", "Malicious"), VENDOR, None) is Classification.MALICIOUS
        assert classify(obs("v1", "Benign"), VENDOR, None) is Classification.BENIGN


class TestComputeMetrics:
    def test_perfect_model(self, store_factory):
        rows = labeled_rows(store_factory, [1.0] * 5, [0.0] * 5)
        m = compute_metrics(rows, [MODEL], 0.5)[0]
        assert (m.tpr, m.fpr) == (1.0, 0.0)
        assert (m.tp, m.fn, m.fp, m.tn) == (5, 0, 0, 5)

    def test_hand_counted_fixture(self, store_factory):
        # 10 malicious, model scans 8 and detects 6: tpr 6/8, ratio 0.8
        scores = [0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.1, 0.1, None, None]
        rows = labeled_rows(store_factory, [s if s is not None else 0.0 for s in scores],
                            [], mal_scan=[s is not None for s in scores])
        m = compute_metrics(rows, [MODEL], 0.5)[0]
        assert m.tpr == pytest.approx(0.75)
        assert m.sample_ratio[Label.MALICIOUS] == pytest.approx(0.8)
        assert m.unscanned == 2

    def test_low_coverage_warning(self, store_factory):
        rows = labeled_rows(store_factory, [0.9] * 4, [None] * 6)
        m = compute_metrics(rows, [MODEL], warn_pct=0.5)[0]
        assert m.low_coverage_warning  # scanned 4 of 10 = 0.4 < 0.5
        m2 = compute_metrics(rows, [MODEL], warn_pct=0.4)[0]
        assert not m2.low_coverage_warning

    def test_undefined_rates_are_none_not_zero(self, store_factory):
        rows = labeled_rows(store_factory, [], [0.1, 0.2])
        m = compute_metrics(rows, [MODEL])[0]
        assert m.tpr is None
        assert m.fpr == 0.0

    def test_unlabeled_excluded_from_confusion(self, store_factory):
        unlabeled = record(50, observations=(obs("model-pe", score=0.99),))
        store = store_factory([unlabeled])
        spec = QuerySpec(time_from=DAY, time_to=DAY, model_type=ArtifactKind.PE,
                         model_versions=frozenset({"model-pe"}))
        rows = store.select(spec)
        assert rows[0].label.label is Label.UNLABELED
        m = compute_metrics(rows, [MODEL])[0]
        assert m.n_labeled == 0
        assert m.sample_ratio[Label.UNLABELED] == 1.0

    def test_per_engine_conditioning_invariance(self, store_factory):
        # dropping rows the engine did not scan never changes its rates
        rows = labeled_rows(store_factory, [0.9, 0.8, 0.2, 0.7], [0.1, 0.6, 0.3],
                            mal_scan=[True, True, True, False])
        with_all = compute_metrics(rows, [MODEL], 0.5)[0]
        scanned_only = [r for r in rows
                        if (o := r.record.observation_for("model-pe")) and o.scanned]
        reduced = compute_metrics(scanned_only, [MODEL], 0.5)[0]
        assert (with_all.tpr, with_all.fpr) == (reduced.tpr, reduced.fpr)
        assert with_all.unscanned != reduced.unscanned

    def test_threshold_monotonicity(self, store_factory):
        rng = random.Random(21)
        rows = labeled_rows(store_factory,
                            [round(rng.random(), 3) for _ in range(40)],
                            [round(rng.random(), 3) for _ in range(40)])
        series = [compute_metrics(rows, [MODEL], t / 20)[0] for t in range(21)]
        assert all(a.tpr >= b.tpr for a, b in zip(series, series[1:]))
        assert all(a.fpr >= b.fpr for a, b in zip(series, series[1:]))


class TestTimeSeries:
    def test_single_day_equals_overall(self, store_factory):
        rows = labeled_rows(store_factory, [0.9, 0.2], [0.1, 0.8])
        overall = compute_metrics(rows, [MODEL], 0.5)[0]
        series = time_series(rows, [MODEL], 0.5)["model-pe"]
        assert len(series) == 1
        point = series[0]
        assert (point.tpr, point.fpr, point.n_labeled) == (
            overall.tpr, overall.fpr, overall.n_labeled)

    def test_gap_day_emitted_as_none(self, store_factory):
        days = [DAY, DAY, DAY + timedelta(days=2)]
        rows = labeled_rows(store_factory, [0.9, 0.2, 0.8], [], days=days)
        series = time_series(rows, [MODEL], 0.5)["model-pe"]
        assert [p.day for p in series] == [DAY, DAY + timedelta(days=1), DAY + timedelta(days=2)]
        assert series[1].tpr is None and series[1].n_labeled == 0

    def test_step_drop_at_exact_day(self, store_factory):
        # model detects 100% before the step day, 50% after
        step = DAY + timedelta(days=3)
        days, mal_scores = [], []
        for d in range(6):
            day = DAY + timedelta(days=d)
            scores = [0.9, 0.9] if day < step else [0.9, 0.1]
            for s in scores:
                days.append(day)
                mal_scores.append(s)
        rows = labeled_rows(store_factory, mal_scores, [], days=days)
        series = time_series(rows, [MODEL], 0.5)["model-pe"]
        for point in series:
            assert point.tpr == (1.0 if point.day < step else 0.5)

    def test_aggregation_consistency(self, store_factory):
        rng = random.Random(31)
        days = [DAY + timedelta(days=rng.randrange(0, 7)) for _ in range(60)]
        rows = labeled_rows(store_factory,
                            [round(rng.random(), 3) for _ in range(30)],
                            [round(rng.random(), 3) for _ in range(30)],
                            days=days)
        whole = compute_metrics(rows, [MODEL], 0.5)[0]
        by_day = {}
        for row in rows:
            by_day.setdefault(row.ingest_day, []).append(row)
        summed = [0, 0, 0, 0]
        for day_rows in by_day.values():
            m = compute_metrics(day_rows, [MODEL], 0.5)[0]
            summed[0] += m.tp
            summed[1] += m.fp
            summed[2] += m.tn
            summed[3] += m.fn
        assert summed == [whole.tp, whole.fp, whole.tn, whole.fn]


def brute_force_roc(scored: list[tuple[float, bool]]):
    """Enumerate every distinct-score cut point directly; the slow oracle."""
    n_pos = sum(1 for _, m in scored if m)
    n_neg = len(scored) - n_pos
    thresholds = [math.inf] + sorted({s for s, _ in scored}, reverse=True)
    if 0.0 not in {s for s, _ in scored}:
        thresholds.append(0.0)
    points = []
    for threshold in thresholds:
        tp = sum(1 for s, m in scored if m and s >= threshold)
        fp = sum(1 for s, m in scored if not m and s >= threshold)
        point = (fp / n_neg, tp / n_pos)
        if not points or points[-1][:2] != point:
            points.append(point)
    return points


class TestRoc:
    def test_perfect_separation(self, store_factory):
        rows = labeled_rows(store_factory, [0.9, 0.8, 0.7], [0.6, 0.4, 0.2])
        curve = roc(rows, MODEL)
        assert curve.auc == pytest.approx(1.0, abs=1e-12)
        assert any(p.fpr == 0.0 and p.tpr == 1.0 for p in curve.points)
        assert (curve.points[0].fpr, curve.points[0].tpr) == (0.0, 0.0)
        assert (curve.points[-1].fpr, curve.points[-1].tpr) == (1.0, 1.0)

    def test_constant_scores_diagonal(self, store_factory):
        rows = labeled_rows(store_factory, [0.5, 0.5], [0.5, 0.5])
        curve = roc(rows, MODEL)
        assert [(p.fpr, p.tpr) for p in curve.points] == [(0.0, 0.0), (1.0, 1.0)]
        assert curve.auc == pytest.approx(0.5, abs=1e-12)

    def test_six_row_fixture_matches_brute_force(self, store_factory):
        mal, ben = [0.9, 0.8, 0.7], [0.6, 0.4, 0.2]
        rows = labeled_rows(store_factory, mal, ben)
        curve = roc(rows, MODEL)
        scored = [(s, True) for s in mal] + [(s, False) for s in ben]
        assert [(p.fpr, p.tpr) for p in curve.points] == brute_force_roc(scored)

    def test_random_fixtures_match_brute_force(self, store_factory):
        rng = random.Random(41)
        for trial in range(25):
            mal = [round(rng.random(), 2) for _ in range(rng.randrange(1, 25))]
            ben = [round(rng.random(), 2) for _ in range(rng.randrange(1, 25))]
            rows = labeled_rows(store_factory, mal, ben)
            curve = roc(rows, MODEL)
            scored = [(s, True) for s in mal] + [(s, False) for s in ben]
            assert [(p.fpr, p.tpr) for p in curve.points] == brute_force_roc(scored), trial
            assert all(a.fpr <= b.fpr and a.tpr <= b.tpr
                       for a, b in zip(curve.points, curve.points[1:]))
            assert 0.0 <= curve.auc <= 1.0

    def test_undefined_without_both_classes(self, store_factory):
        assert roc(labeled_rows(store_factory, [0.9], []), MODEL) is None
        assert roc(labeled_rows(store_factory, [], [0.1]), MODEL) is None

    def test_vendor_rejected(self, store_factory):
        with pytest.raises(ValueError):
            roc([], VENDOR)
