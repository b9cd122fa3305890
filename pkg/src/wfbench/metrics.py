"""Closed-world accuracy, open-world rates, and threshold trade-off curves.

Open-world rates: two-class TPR counts monitored traces predicted as any
monitored site, multi-class TPR counts exact site matches, FPR counts
unmonitored traces predicted as monitored. Zero denominators are rejected
rather than defined away, to surface mis-specified experiments.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .ensemble import apply_threshold


class MetricError(Exception):
    """Evaluation population is missing or inconsistent."""


@dataclass(frozen=True)
class EvaluationReport:
    setting: str  # "closed" | "open"
    threshold: float
    counts: dict
    accuracy: float | None = None
    two_tpr: float | None = None
    multi_tpr: float | None = None
    fpr: float | None = None

    def to_dict(self) -> dict:
        data = {"setting": self.setting, "threshold": self.threshold, "counts": dict(self.counts)}
        if self.setting == "closed":
            data["accuracy"] = self.accuracy
        else:
            data.update(two_tpr=self.two_tpr, multi_tpr=self.multi_tpr, fpr=self.fpr)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def closed_world_accuracy(preds, labels) -> float:
    """Exact-match fraction; every label must be a monitored site."""
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape or preds.ndim != 1:
        raise MetricError(f"prediction/label shape mismatch: {preds.shape} vs {labels.shape}")
    if len(labels) == 0:
        raise MetricError("no traces to evaluate")
    return float(np.mean(preds == labels))


def open_world_metrics(preds, labels, unmonitored_index: int) -> tuple[float, float, float]:
    """(two_tpr, multi_tpr, fpr); needs both populations present."""
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    if preds.shape != labels.shape or preds.ndim != 1:
        raise MetricError(f"prediction/label shape mismatch: {preds.shape} vs {labels.shape}")
    monitored = labels != unmonitored_index
    n_mon = int(monitored.sum())
    n_unmon = len(labels) - n_mon
    if n_mon == 0 or n_unmon == 0:
        raise MetricError(
            f"need monitored and unmonitored traces, got {n_mon} and {n_unmon}"
        )
    pred_monitored = preds != unmonitored_index
    two_tpr = float(np.sum(monitored & pred_monitored) / n_mon)
    multi_tpr = float(np.sum(monitored & (preds == labels)) / n_mon)
    fpr = float(np.sum(~monitored & pred_monitored) / n_unmon)
    return two_tpr, multi_tpr, fpr


def closed_world_report(preds, labels) -> EvaluationReport:
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    accuracy = closed_world_accuracy(preds, labels)
    counts = {
        "n_monitored_test": int(len(labels)),
        "n_unmonitored_test": 0,
        "n_correct": int(np.sum(preds == labels)),
    }
    return EvaluationReport(setting="closed", threshold=0.0, counts=counts, accuracy=accuracy)


def open_world_report(preds, labels, unmonitored_index: int, threshold: float) -> EvaluationReport:
    preds = np.asarray(preds)
    labels = np.asarray(labels)
    two_tpr, multi_tpr, fpr = open_world_metrics(preds, labels, unmonitored_index)
    monitored = labels != unmonitored_index
    counts = {
        "n_monitored_test": int(monitored.sum()),
        "n_unmonitored_test": int((~monitored).sum()),
        "two_class_true_positives": int(np.sum(monitored & (preds != unmonitored_index))),
        "multi_class_true_positives": int(np.sum(monitored & (preds == labels))),
        "false_positives": int(np.sum(~monitored & (preds != unmonitored_index))),
    }
    return EvaluationReport(
        setting="open",
        threshold=float(threshold),
        counts=counts,
        two_tpr=two_tpr,
        multi_tpr=multi_tpr,
        fpr=fpr,
    )


def tpr_fpr_curve(
    probs, labels, thresholds, unmonitored_index: int | None = None
) -> list[EvaluationReport]:
    """Open-world report per threshold; thresholds must ascend."""
    probs = np.asarray(probs, dtype=np.float64)
    thresholds = list(thresholds)
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise MetricError("thresholds must be sorted ascending")
    if unmonitored_index is None:
        unmonitored_index = probs.shape[1] - 1
    reports = []
    for threshold in thresholds:
        preds = apply_threshold(probs, threshold, unmonitored_index)
        reports.append(open_world_report(preds, labels, unmonitored_index, threshold))
    return reports


def curve_csv(reports: list[EvaluationReport]) -> str:
    """CSV rendering: threshold,two_tpr,multi_tpr,fpr."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["threshold", "two_tpr", "multi_tpr", "fpr"])
    for report in reports:
        writer.writerow(
            [report.threshold, f"{report.two_tpr:.6f}", f"{report.multi_tpr:.6f}", f"{report.fpr:.6f}"]
        )
    return buf.getvalue()
