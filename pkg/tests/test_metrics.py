"""Metric tests: exhaustive agreement with exact rational arithmetic,
micro/macro consistency, and the report structure."""

from fractions import Fraction

import numpy as np
import pytest

from fusetext.errors import ContractError
from fusetext.metrics import (
    ClassReport,
    ConfusionCounts,
    MetricValues,
    compute_metrics,
    confusion_counts,
    evaluate_predictions,
    macro_average,
    render_reports,
)


def brute_force_counts(predictions, labels, positive):
    """Independent recount used as the oracle for confusion_counts."""
    tp = sum(1 for p, g in zip(predictions, labels) if p == positive and g == positive)
    fp = sum(1 for p, g in zip(predictions, labels) if p == positive and g != positive)
    fn = sum(1 for p, g in zip(predictions, labels) if p != positive and g == positive)
    tn = len(labels) - tp - fp - fn
    return tp, tn, fp, fn


class TestConfusionCounts:
    def test_all_correct(self):
        c = confusion_counts([0, 1, 0], [0, 1, 0], positive_class=0)
        assert (c.fp, c.fn) == (0, 0)
        assert c.total == 3

    def test_binary_all_wrong(self):
        c = confusion_counts([1, 0], [0, 1], positive_class=1)
        assert (c.tp, c.tn) == (0, 0)
        assert (c.fp, c.fn) == (1, 1)

    def test_matches_brute_force_on_10000_random_pairs(self):
        rng = np.random.default_rng(0)
        preds = rng.integers(0, 4, size=10000).tolist()
        labels = rng.integers(0, 4, size=10000).tolist()
        for positive in range(4):
            c = confusion_counts(preds, labels, positive)
            assert (c.tp, c.tn, c.fp, c.fn) == brute_force_counts(preds, labels, positive)

    def test_errors(self):
        with pytest.raises(ContractError):
            confusion_counts([0], [0, 1], 0)
        with pytest.raises(ContractError):
            confusion_counts([], [], 0)


class TestComputeMetrics:
    def test_worked_case(self):
        m = compute_metrics(ConfusionCounts(tp=9, tn=82, fp=1, fn=8))
        assert m.accuracy == 0.91
        assert m.precision == 0.9
        assert m.recall == 9 / 17
        assert m.f1 == pytest.approx(2 * 0.9 * (9 / 17) / (0.9 + 9 / 17), abs=1e-15)

    def test_zero_division_convention(self):
        m = compute_metrics(ConfusionCounts(tp=0, tn=5, fp=0, fn=0))
        assert (m.accuracy, m.precision, m.recall, m.f1) == (1.0, 0.0, 0.0, 0.0)

    def test_f1_equals_p_when_p_equals_r(self):
        m = compute_metrics(ConfusionCounts(tp=3, tn=4, fp=2, fn=2))
        assert m.precision == m.recall
        assert m.f1 == pytest.approx(m.precision, abs=1e-15)

    def test_exhaustive_against_exact_rationals(self):
        # Every count tuple in {0..20}^4 with a positive total. Single
        # float divisions are correctly rounded, so accuracy, precision,
        # and recall must match the exact rational bit for bit; f1 composes
        # three roundings and gets a small tolerance.
        for tp in range(21):
            for tn in range(21):
                for fp in range(21):
                    for fn in range(21):
                        total = tp + tn + fp + fn
                        if total == 0:
                            continue
                        m = compute_metrics(ConfusionCounts(tp, tn, fp, fn))
                        assert m.accuracy == float(Fraction(tp + tn, total))
                        p_den, r_den = tp + fp, tp + fn
                        exact_p = Fraction(tp, p_den) if p_den else Fraction(0)
                        exact_r = Fraction(tp, r_den) if r_den else Fraction(0)
                        assert m.precision == float(exact_p)
                        assert m.recall == float(exact_r)
                        if exact_p + exact_r > 0:
                            exact_f1 = 2 * exact_p * exact_r / (exact_p + exact_r)
                            assert abs(m.f1 - float(exact_f1)) <= 1e-12
                        else:
                            assert m.f1 == 0.0

    def test_f1_between_precision_and_recall(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            tp, tn, fp, fn = (int(v) for v in rng.integers(0, 30, size=4))
            if tp + tn + fp + fn == 0:
                continue
            m = compute_metrics(ConfusionCounts(tp, tn, fp, fn))
            if m.precision > 0 and m.recall > 0:
                assert min(m.precision, m.recall) - 1e-12 <= m.f1 <= max(m.precision, m.recall) + 1e-12

    def test_rejects_empty(self):
        with pytest.raises(ContractError):
            compute_metrics(ConfusionCounts(0, 0, 0, 0))


class TestMacroAverage:
    def test_identical_values(self):
        vals = [MetricValues(1.0, 0.6, 0.6, 0.6)] * 3
        assert macro_average(vals) == (0.6, 0.6, 0.6)

    def test_two_class_mean(self):
        vals = [MetricValues(1.0, 0.2, 0.4, 0.4), MetricValues(1.0, 0.8, 0.6, 0.6)]
        mp, mr, mf1 = macro_average(vals)
        assert (mp, mr, mf1) == (0.5, 0.5, 0.5)

    def test_rejects_empty(self):
        with pytest.raises(ContractError):
            macro_average([])


class TestEvaluatePredictions:
    def test_absent_class_excluded(self):
        # Gold labels only cover classes 0 and 1; class 2 must not appear.
        rep = evaluate_predictions([0, 1, 2, 0], [0, 1, 1, 0], ["a", "b", "c"])
        assert [row.name for row in rep.per_class] == ["a", "b"]

    def test_micro_consistency_binary(self):
        # For a two-class task, pooling one-vs-rest counts over both classes
        # and applying the accuracy formula reproduces plain accuracy.
        rng = np.random.default_rng(2)
        preds = rng.integers(0, 2, size=500).tolist()
        labels = rng.integers(0, 2, size=500).tolist()
        pooled = [confusion_counts(preds, labels, c) for c in (0, 1)]
        tp = sum(c.tp for c in pooled)
        tn = sum(c.tn for c in pooled)
        total = sum(c.total for c in pooled)
        accuracy = sum(1 for p, g in zip(preds, labels) if p == g) / len(labels)
        assert (tp + tn) / total == accuracy

    def test_micro_consistency_multiclass(self):
        # For C > 2 the TN-inclusive form over-counts, but pooled tp over N
        # (micro precision == micro recall) still equals accuracy exactly.
        rng = np.random.default_rng(3)
        preds = rng.integers(0, 5, size=700).tolist()
        labels = rng.integers(0, 5, size=700).tolist()
        pooled = [confusion_counts(preds, labels, c) for c in range(5)]
        tp = sum(c.tp for c in pooled)
        fp = sum(c.fp for c in pooled)
        fn = sum(c.fn for c in pooled)
        accuracy = sum(1 for p, g in zip(preds, labels) if p == g) / len(labels)
        assert tp / (tp + fp) == accuracy
        assert tp / (tp + fn) == accuracy

    def test_zero_division_flagged(self):
        rep = evaluate_predictions([0, 0, 0], [0, 0, 1], ["a", "b"])
        flagged = {row.name: row.zero_division for row in rep.per_class}
        assert flagged["b"] is True

    def test_report_serialization(self):
        rep = evaluate_predictions([0, 1], [0, 1], ["a", "b"])
        doc = rep.to_dict()
        assert set(doc) == {"accuracy", "precision", "recall", "f1", "per_class"}
        assert doc["accuracy"] == 1.0

    def test_render_contains_model_rows(self):
        rep = evaluate_predictions([0, 1], [0, 1], ["a", "b"])
        text = render_reports({"fusion": rep, "tfidf_logreg": rep})
        assert "fusion" in text and "tfidf_logreg" in text
