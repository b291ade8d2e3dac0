"""Confusion matrices, accuracy/precision/recall/F1, and report rendering."""

from __future__ import annotations

import dataclasses
import io

import numpy as np


@dataclasses.dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i][j] = samples with true class i predicted as class j."""

    counts: np.ndarray
    class_names: tuple

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise ValueError("counts must be a square matrix")
        if len(self.class_names) != counts.shape[0]:
            raise ValueError("class_names length must match matrix size")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return int(self.counts.sum())


@dataclasses.dataclass(frozen=True)
class ScoreReport:
    accuracy: float
    precision: np.ndarray  # per class
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float


def confusion_matrix(y_true, y_pred, n_classes, class_names=None):
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if len(y_true) != len(y_pred):
        raise ValueError("y_true/y_pred length mismatch")
    for name, labels in (("y_true", y_true), ("y_pred", y_pred)):
        if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
            raise ValueError(f"{name} contains labels outside [0, {n_classes})")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    if class_names is None:
        class_names = tuple(f"class_{i}" for i in range(n_classes))
    return ConfusionMatrix(counts=counts, class_names=tuple(class_names))


def _safe_div(num, den):
    """0/0 -> 0 by convention, keeps degenerate classes reportable."""
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    out = np.zeros_like(num)
    np.divide(num, den, out=out, where=den != 0)
    return out


def classification_scores(cm):
    """Accuracy, per-class and macro/weighted precision, recall, F1."""
    counts = cm.counts
    total = counts.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    diag = np.diag(counts).astype(np.float64)
    col_sums = counts.sum(axis=0).astype(np.float64)
    row_sums = counts.sum(axis=1).astype(np.float64)

    precision = _safe_div(diag, col_sums)
    recall = _safe_div(diag, row_sums)
    f1 = _safe_div(2.0 * precision * recall, precision + recall)
    support = row_sums.astype(np.int64)
    weights = row_sums / total
    return ScoreReport(
        accuracy=float(diag.sum() / total),
        precision=precision,
        recall=recall,
        f1=f1,
        support=support,
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        weighted_precision=float(np.dot(weights, precision)),
        weighted_recall=float(np.dot(weights, recall)),
        weighted_f1=float(np.dot(weights, f1)),
    )


REPORT_CSV_HEADER = (
    "algorithm,target,accuracy,precision_macro,recall_macro,f1_macro,"
    "precision_weighted,recall_weighted,f1_weighted"
)


def render_report(rows, target=""):
    """(table text, csv text) for (algorithm, ScoreReport) rows.

    The table mimics the result-table style: accuracy as a percentage with
    two decimals, macro P/R/F1 as whole percentages. The CSV keeps full
    precision.
    """
    if not rows:
        raise ValueError("no report rows")
    name_width = max(len("Algorithm"), max(len(name) for name, _ in rows))
    table = io.StringIO()
    header = f"{'Algorithm':<{name_width}}  {'Accuracy':>9}  {'Precision':>9}  {'Recall':>7}  {'F1 score':>8}"
    table.write(header + "\n")
    table.write("-" * len(header) + "\n")
    csv_lines = [REPORT_CSV_HEADER]
    for name, report in rows:
        table.write(
            f"{name:<{name_width}}  {report.accuracy * 100:>8.2f}%  "
            f"{round(report.macro_precision * 100):>8.0f}%  "
            f"{round(report.macro_recall * 100):>6.0f}%  "
            f"{round(report.macro_f1 * 100):>7.0f}%\n"
        )
        csv_lines.append(
            ",".join(
                [name, target]
                + [
                    repr(v)
                    for v in (
                        report.accuracy,
                        report.macro_precision,
                        report.macro_recall,
                        report.macro_f1,
                        report.weighted_precision,
                        report.weighted_recall,
                        report.weighted_f1,
                    )
                ]
            )
        )
    return table.getvalue(), "\n".join(csv_lines) + "\n"


def confusion_to_csv(cm):
    """CSV grid with class-name headers (true rows, predicted columns)."""
    lines = ["true\\predicted," + ",".join(cm.class_names)]
    for name, row in zip(cm.class_names, cm.counts):
        lines.append(name + "," + ",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"
