"""Chi-square feature scoring and mean-threshold selection."""

import json
import math

import numpy as np
import pytest

from botsift import (FeatureScoreError, FeatureScoreReport, chi2_scores,
                     select_features)

from conftest import make_dataset


def chi2_oracle(X, y):
    """Loop-coded chi-square over per-class value sums."""
    n = len(y)
    counts = [int(np.sum(y == 0)), int(np.sum(y == 1))]
    out = []
    for j in range(X.shape[1]):
        col = [float(v) for v in X[:, j]]
        if max(col) == min(col):
            out.append(0.0)
            continue
        observed = [0.0, 0.0]
        for value, label in zip(col, y):
            observed[int(label)] += value
        total = observed[0] + observed[1]
        if total == 0:
            out.append(0.0)
            continue
        score = 0.0
        for c in (0, 1):
            expected = counts[c] / n * total
            score += (observed[c] - expected) ** 2 / expected
        out.append(score)
    return out


class TestChi2Scores:
    def test_feature_equal_to_label_scores_half_n(self):
        y = np.array([0] * 50 + [1] * 50)
        ds = make_dataset(y.reshape(-1, 1).astype(float), y)
        report = chi2_scores(ds)
        assert report.scores[0] == 50.0

    def test_constant_column_scores_exactly_zero(self):
        X = np.column_stack([np.full(40, 3.7), np.arange(40, dtype=float)])
        y = np.array([0, 1] * 20)
        report = chi2_scores(make_dataset(X, y))
        assert report.scores[0] == 0.0

    def test_all_zero_column_scores_exactly_zero(self):
        X = np.column_stack([np.zeros(10), np.arange(10, dtype=float)])
        y = np.array([0] * 5 + [1] * 5)
        assert chi2_scores(make_dataset(X, y)).scores[0] == 0.0

    def test_matches_loop_oracle(self, rng):
        for _ in range(50):
            n = int(rng.integers(10, 200))
            d = int(rng.integers(1, 8))
            X = rng.random((n, d)) * rng.integers(1, 100)
            y = np.zeros(n, dtype=int)
            y[: int(rng.integers(1, n))] = 1
            rng.shuffle(y)
            if len(set(y.tolist())) < 2:
                continue
            got = chi2_scores(make_dataset(X, y)).scores
            want = chi2_oracle(X, y)
            for g, w in zip(got, want):
                assert math.isclose(g, w, rel_tol=1e-9, abs_tol=1e-12)

    def test_scales_linearly_with_values(self, rng):
        X = rng.random((80, 4)) * 9
        y = rng.integers(0, 2, 80)
        y[0], y[1] = 0, 1
        one = chi2_scores(make_dataset(X, y)).scores
        two = chi2_scores(make_dataset(2.0 * X, y)).scores
        assert np.array_equal(two, 2.0 * one)

    def test_rejects_negative_values(self):
        ds = make_dataset([[1.0], [-0.5]], [0, 1])
        with pytest.raises(FeatureScoreError, match="non-negative"):
            chi2_scores(ds)

    def test_rejects_single_class(self):
        ds = make_dataset([[1.0], [2.0]], [1, 1])
        with pytest.raises(FeatureScoreError, match="both classes"):
            chi2_scores(ds)

    def test_ranking_descends_and_breaks_ties_by_column_order(self):
        y = np.array([0] * 10 + [1] * 10)
        strong = y.astype(float)
        weak = np.where(y == 1, 0.6, 0.4)
        X = np.column_stack([weak, strong, weak])
        report = chi2_scores(make_dataset(X, y, names=("a", "b", "c")))
        assert report.scores[0] == report.scores[2]
        assert report.ranked_names == ("b", "a", "c")

    def test_selection_is_strictly_above_mean(self, rng):
        for _ in range(20):
            n = int(rng.integers(20, 100))
            X = rng.random((n, 5))
            y = rng.integers(0, 2, n)
            y[0], y[1] = 0, 1
            report = chi2_scores(make_dataset(X, y))
            want = tuple(name for name, s in
                         zip(report.feature_names, report.scores)
                         if s > np.mean(report.scores))
            assert report.selected == want


class TestSelectFeatures:
    def test_keeps_only_columns_above_mean(self):
        scores = np.array([9.0, 3.0, 0.0])
        report = FeatureScoreReport(
            feature_names=("a", "b", "c"), scores=scores,
            mean_score=4.0, selected=("a",), ranked_names=("a", "b", "c"))
        ds = make_dataset([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], [0, 1],
                          names=("a", "b", "c"))
        kept = select_features(ds, report)
        assert kept.feature_names == ("a",)
        assert list(kept.features[:, 0]) == [1.0, 4.0]
        assert np.array_equal(kept.labels, ds.labels)

    def test_equal_scores_select_nothing_and_error(self):
        y = np.array([0] * 8 + [1] * 8)
        col = y.astype(float)
        ds = make_dataset(np.column_stack([col, col]), y)
        report = chi2_scores(ds)
        assert report.selected == ()
        with pytest.raises(FeatureScoreError, match="empty"):
            select_features(ds, report)

    def test_report_from_other_columns_rejected(self):
        ds = make_dataset([[1.0], [2.0]], [0, 1], names=("a",))
        other = make_dataset([[1.0], [2.0]], [0, 1], names=("b",))
        report = chi2_scores(other)
        with pytest.raises(FeatureScoreError, match="different"):
            select_features(ds, report)


class TestReportOutput:
    def test_table_lists_scores_in_descending_order(self, tmp_path):
        y = np.array([0] * 10 + [1] * 10)
        X = np.column_stack([np.where(y == 1, 0.7, 0.3), y.astype(float)])
        report = chi2_scores(make_dataset(X, y, names=("mild", "exact")))
        path = str(tmp_path / "scores.txt")
        report.to_table(path)
        with open(path, encoding="utf-8") as fh:
            rows = [line.rstrip("\n").split("\t") for line in fh]
        assert [r[0] for r in rows] == ["exact", "mild"]
        values = [float(r[1]) for r in rows]
        assert values == sorted(values, reverse=True)

    def test_json_payload_round_trips(self, tmp_path):
        y = np.array([0] * 6 + [1] * 6)
        X = np.column_stack([y.astype(float), np.full(12, 2.0)])
        report = chi2_scores(make_dataset(X, y, names=("hit", "flat")))
        path = str(tmp_path / "scores.json")
        report.to_json(path)
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        assert payload["scores"]["hit"] == report.scores[0]
        assert payload["scores"]["flat"] == 0.0
        assert payload["selected"] == ["hit"]
        assert payload["ranked"] == ["hit", "flat"]
        assert payload["mean_score"] == report.mean_score
