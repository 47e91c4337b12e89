"""Multi-class metrics, confusion matrices, and model comparison reports."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Label

REPORT_SCHEMA_VERSION = 1

N_CLASSES = len(Label)


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    per_class: dict[Label, ClassMetrics]
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    confusion: np.ndarray  # rows = true, cols = predicted

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "accuracy": self.accuracy,
            "per_class": {
                lab.canonical_name: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for lab, m in self.per_class.items()
            },
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "weighted": {
                "precision": self.weighted_precision,
                "recall": self.weighted_recall,
                "f1": self.weighted_f1,
            },
            "confusion": self.confusion.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        if d.get("schema_version") != REPORT_SCHEMA_VERSION:
            raise EvalError(f"unsupported report schema: {d.get('schema_version')!r}")
        per_class = {
            Label.from_name(name): ClassMetrics(
                m["precision"], m["recall"], m["f1"], m["support"]
            )
            for name, m in d["per_class"].items()
        }
        return cls(
            per_class=per_class,
            accuracy=d["accuracy"],
            macro_precision=d["macro"]["precision"],
            macro_recall=d["macro"]["recall"],
            macro_f1=d["macro"]["f1"],
            weighted_precision=d["weighted"]["precision"],
            weighted_recall=d["weighted"]["recall"],
            weighted_f1=d["weighted"]["f1"],
            confusion=np.array(d["confusion"], dtype=int),
        )


def evaluate(y_true: list[Label], y_pred: list[Label]) -> MetricsReport:
    """Per-class precision/recall/F1/support plus macro, weighted, accuracy.

    Zero denominators yield 0; macro averages over all five classes even when
    a class is absent from the data.
    """
    if len(y_true) != len(y_pred):
        raise EvalError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    if not y_true:
        raise EvalError("evaluate needs at least one sample")

    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=int)
    for t, p in zip(y_true, y_pred):
        confusion[int(t), int(p)] += 1

    total = confusion.sum()
    col_sums = confusion.sum(axis=0)
    row_sums = confusion.sum(axis=1)

    per_class = {}
    for lab in Label:
        c = int(lab)
        tp = confusion[c, c]
        prec = tp / col_sums[c] if col_sums[c] else 0.0
        rec = tp / row_sums[c] if row_sums[c] else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        per_class[lab] = ClassMetrics(prec, rec, f1, int(row_sums[c]))

    supports = np.array([per_class[lab].support for lab in Label], dtype=float)
    precs = np.array([per_class[lab].precision for lab in Label])
    recs = np.array([per_class[lab].recall for lab in Label])
    f1s = np.array([per_class[lab].f1 for lab in Label])

    return MetricsReport(
        per_class=per_class,
        accuracy=confusion.trace() / total,
        macro_precision=precs.mean(),
        macro_recall=recs.mean(),
        macro_f1=f1s.mean(),
        weighted_precision=float(precs @ supports / total),
        weighted_recall=float(recs @ supports / total),
        weighted_f1=float(f1s @ supports / total),
        confusion=confusion,
    )


@dataclass(frozen=True)
class Comparison:
    #: (name, accuracy, weighted_f1) sorted by accuracy descending.
    rows: list[tuple[str, float, float]]
    baseline: str | None = None
    #: Relative improvement of the best model over the baseline, in percent,
    #: rounded to 2 decimals: 100 * (best - baseline) / baseline.
    improvement_pct: float | None = None

    def format_table(self) -> str:
        lines = [f"{'model':<24} {'accuracy':>9} {'weighted F1':>12}"]
        for name, acc, f1 in self.rows:
            lines.append(f"{name:<24} {acc:>9.4f} {f1:>12.4f}")
        if self.improvement_pct is not None:
            lines.append(
                f"best ({self.rows[0][0]}) improves on {self.baseline} "
                f"by {self.improvement_pct:.2f}%"
            )
        return "\n".join(lines)


def compare(reports: dict[str, MetricsReport], baseline: str | None = None) -> Comparison:
    """Rank reports by accuracy; report the best model's relative improvement
    over `baseline` (default: the lowest-accuracy model)."""
    if not reports:
        raise EvalError("compare needs at least one report")
    rows = sorted(
        ((name, r.accuracy, r.weighted_f1) for name, r in reports.items()),
        key=lambda row: (-row[1], row[0]),
    )
    if len(rows) == 1:
        return Comparison(rows=rows)
    if baseline is None:
        baseline = rows[-1][0]
    if baseline not in reports:
        raise EvalError(f"baseline {baseline!r} not among reports")
    base_acc = reports[baseline].accuracy
    if base_acc == 0:
        raise EvalError("baseline accuracy is zero; relative improvement undefined")
    improvement = round(100.0 * (rows[0][1] - base_acc) / base_acc, 2)
    return Comparison(rows=rows, baseline=baseline, improvement_pct=improvement)


def save_report(report: MetricsReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def load_report(path: str | Path) -> MetricsReport:
    return MetricsReport.from_dict(json.loads(Path(path).read_text()))


def confusion_to_csv(report: MetricsReport, path: str | Path) -> None:
    """Confusion matrix CSV: header row/column of label names, rows = true."""
    names = [lab.canonical_name for lab in Label]
    with Path(path).open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["true\\predicted"] + names)
        for lab in Label:
            writer.writerow([lab.canonical_name] + report.confusion[int(lab)].tolist())


def render_heatmap(report: MetricsReport, path: str | Path) -> None:
    """Confusion-matrix heatmap image with per-cell counts."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = [lab.canonical_name for lab in Label]
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(report.confusion, cmap="Blues")
    ax.set_xticks(range(N_CLASSES), names, rotation=45, ha="right")
    ax.set_yticks(range(N_CLASSES), names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = report.confusion.max() / 2 if report.confusion.max() else 0.5
    for i in range(N_CLASSES):
        for j in range(N_CLASSES):
            color = "white" if report.confusion[i, j] > threshold else "black"
            ax.text(j, i, str(report.confusion[i, j]), ha="center", va="center", color=color)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
