"""Confusion-matrix metrics and the multi-class report with macro averages.

All 0/0 denominators resolve to 0 by convention; the affected class rows
are flagged in the report.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ContractError


@dataclass
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass
class MetricValues:
    accuracy: float
    precision: float
    recall: float
    f1: float


@dataclass
class ClassReport:
    name: str
    precision: float
    recall: float
    f1: float
    zero_division: bool = False


@dataclass
class MetricsReport:
    per_class: list[ClassReport]
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.macro_precision,
            "recall": self.macro_recall,
            "f1": self.macro_f1,
            "per_class": [
                {
                    "class": row.name,
                    "precision": row.precision,
                    "recall": row.recall,
                    "f1": row.f1,
                    "zero_division": row.zero_division,
                }
                for row in self.per_class
            ],
        }


def confusion_counts(predictions: Sequence, labels: Sequence, positive_class) -> ConfusionCounts:
    """One-vs-rest counts treating positive_class as the positive label."""
    if len(predictions) != len(labels):
        raise ContractError(
            f"predictions ({len(predictions)}) and labels ({len(labels)}) differ in length"
        )
    if len(predictions) == 0:
        raise ContractError("cannot count an empty evaluation set")
    tp = tn = fp = fn = 0
    for pred, gold in zip(predictions, labels):
        pred_pos = pred == positive_class
        gold_pos = gold == positive_class
        if pred_pos and gold_pos:
            tp += 1
        elif pred_pos:
            fp += 1
        elif gold_pos:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, tn, fp, fn)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def compute_metrics(counts: ConfusionCounts) -> MetricValues:
    """Accuracy, precision, recall, and F1 from the four counts."""
    if counts.total <= 0:
        raise ContractError("metrics need at least one counted example")
    accuracy = (counts.tp + counts.tn) / counts.total
    precision = _ratio(counts.tp, counts.tp + counts.fp)
    recall = _ratio(counts.tp, counts.tp + counts.fn)
    f1 = _ratio(2.0 * precision * recall, precision + recall)
    return MetricValues(accuracy, precision, recall, f1)


def macro_average(per_class: Sequence[MetricValues]) -> tuple[float, float, float]:
    """Unweighted mean of per-class precision/recall/F1."""
    if not per_class:
        raise ContractError("macro average needs at least one class")
    n = len(per_class)
    return (
        sum(m.precision for m in per_class) / n,
        sum(m.recall for m in per_class) / n,
        sum(m.f1 for m in per_class) / n,
    )


def evaluate_predictions(
    predictions: Sequence[int],
    labels: Sequence[int],
    label_names: Sequence[str],
) -> MetricsReport:
    """Per-class one-vs-rest metrics for every class present in the gold
    labels, plus multi-class accuracy and macro averages.
    """
    if len(predictions) != len(labels):
        raise ContractError("predictions and labels differ in length")
    if not labels:
        raise ContractError("cannot evaluate an empty set")
    present = sorted(set(labels))
    rows: list[ClassReport] = []
    values: list[MetricValues] = []
    for cls in present:
        counts = confusion_counts(predictions, labels, cls)
        m = compute_metrics(counts)
        degenerate = (counts.tp + counts.fp == 0) or (counts.tp + counts.fn == 0) or (
            m.precision + m.recall == 0
        )
        rows.append(ClassReport(label_names[cls], m.precision, m.recall, m.f1, degenerate))
        values.append(m)
    accuracy = sum(1 for p, g in zip(predictions, labels) if p == g) / len(labels)
    mp, mr, mf1 = macro_average(values)
    return MetricsReport(rows, accuracy, mp, mr, mf1)


def render_reports(reports: dict[str, MetricsReport], per_class: bool = True) -> str:
    """Aligned text table; one row per model, then per-class blocks."""
    lines = []
    header = f"{'model':<16} {'accuracy':>9} {'precision':>10} {'recall':>8} {'f1':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for name, rep in reports.items():
        lines.append(
            f"{name:<16} {rep.accuracy:>9.4f} {rep.macro_precision:>10.4f} "
            f"{rep.macro_recall:>8.4f} {rep.macro_f1:>8.4f}"
        )
    if per_class:
        for name, rep in reports.items():
            lines.append("")
            lines.append(f"per-class ({name}):")
            for row in rep.per_class:
                flag = "  (no positives)" if row.zero_division else ""
                lines.append(
                    f"  {row.name:<22} precision={row.precision:.4f} "
                    f"recall={row.recall:.4f} f1={row.f1:.4f}{flag}"
                )
    return "\n".join(lines)
