"""Post-training combination of the two variant models.

The two softmax outputs are averaged elementwise (equal weights), then an
optional confidence threshold reassigns low-confidence monitored
predictions to the unmonitored class.
"""
from __future__ import annotations

import csv
import io

import numpy as np


class EnsembleError(Exception):
    """Probability matrices cannot be combined."""


class RangeError(Exception):
    """Threshold outside its valid range or setting."""


def average_softmax(p_dir, p_time, classes_dir=None, classes_time=None) -> np.ndarray:
    """Arithmetic mean of two probability matrices.

    Shapes must match; when class lists are given they must match exactly
    (order included), since rows are only comparable per class.
    """
    a = np.asarray(p_dir, dtype=np.float64)
    b = np.asarray(p_time, dtype=np.float64)
    if a.shape != b.shape:
        raise EnsembleError(f"shape mismatch: {a.shape} vs {b.shape}")
    if classes_dir is not None or classes_time is not None:
        if list(classes_dir or []) != list(classes_time or []):
            raise EnsembleError("class orderings differ between the two models")
    return (a + b) / 2.0


def apply_threshold(p, threshold: float, unmonitored_index: int | None) -> np.ndarray:
    """Predicted class per row after the confidence constraint.

    Prediction is the argmax (ties break to the lowest class index). In
    the open world, a monitored argmax whose probability falls below the
    threshold is reassigned to the unmonitored class; an unmonitored
    argmax is never changed. Closed world takes no threshold, so it must
    be 0 with no unmonitored index.
    """
    p = np.asarray(p, dtype=np.float64)
    if not 0.0 <= threshold <= 1.0:
        raise RangeError(f"threshold must lie in [0, 1], got {threshold}")
    if unmonitored_index is None and threshold != 0.0:
        raise RangeError("closed-world predictions take no threshold (must be 0)")
    preds = p.argmax(axis=1)
    if unmonitored_index is None:
        return preds
    if not 0 <= unmonitored_index < p.shape[1]:
        raise RangeError(f"unmonitored index {unmonitored_index} outside {p.shape[1]} classes")
    confidence = p[np.arange(len(p)), preds]
    demote = (preds != unmonitored_index) & (confidence < threshold)
    preds = preds.copy()
    preds[demote] = unmonitored_index
    return preds


def predictions_csv(probs, labels, preds, threshold: float) -> str:
    """Prediction table: trace_index,true_class,p_argmax,argmax_class,predicted_class,threshold."""
    probs = np.asarray(probs, dtype=np.float64)
    argmax = probs.argmax(axis=1)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["trace_index", "true_class", "p_argmax", "argmax_class", "predicted_class", "threshold"]
    )
    for i, (label, pred) in enumerate(zip(labels, preds)):
        writer.writerow(
            [i, int(label), f"{probs[i, argmax[i]]:.6f}", int(argmax[i]), int(pred), threshold]
        )
    return buf.getvalue()
