"""Accuracy, pairwise accuracy, and confusion-matrix measurement."""

from __future__ import annotations

import numpy as np

from .core import BinaryPrediction, LabeledBatch, Posterior


def argmax_predict(p: Posterior) -> int:
    """Index of the maximum entry; ties go to the lowest index."""
    return int(np.argmax(p.probs))


def accuracy(predictions: list[tuple[str, int]], labels: LabeledBatch) -> float:
    """Fraction of correct predictions, matched to labels by sample_id."""
    truth = labels.labels_by_id()
    if {sid for sid, _ in predictions} != set(truth):
        raise ValueError("prediction sample_ids do not match label sample_ids")
    correct = sum(1 for sid, pred in predictions if pred == truth[sid])
    return correct / len(predictions)


def pairwise_accuracy(
    binary_preds: list[tuple[str, BinaryPrediction]], labels: LabeledBatch
) -> float:
    """Fraction of samples where the higher-probability class matches the label.

    Every label must be one of the prediction's two classes; a tie at 0.5
    counts as predicting class_a.
    """
    truth = labels.labels_by_id()
    if not binary_preds:
        raise ValueError("empty prediction list")
    correct = 0
    for sid, bp in binary_preds:
        label = truth[sid]
        if label not in (bp.class_a, bp.class_b):
            raise ValueError(
                f"sample {sid!r} has label {label}, not in pair ({bp.class_a},{bp.class_b})"
            )
        predicted = bp.class_a if bp.prob_a >= 0.5 else bp.class_b
        correct += predicted == label
    return correct / len(binary_preds)


def confusion_matrix(predictions: list[tuple[str, int]], labels: LabeledBatch) -> np.ndarray:
    """Count matrix with entry (true, predicted); rows sum to per-class support."""
    truth = labels.labels_by_id()
    if {sid for sid, _ in predictions} != set(truth):
        raise ValueError("prediction sample_ids do not match label sample_ids")
    counts = np.zeros((labels.c, labels.c), dtype=np.int64)
    for sid, pred in predictions:
        counts[truth[sid], pred] += 1
    return counts


def worst_confused_pair(confusion: np.ndarray) -> tuple[int, int] | None:
    """Unordered pair with the most combined off-diagonal errors.

    Ties resolve to the lexicographically smaller pair; returns ``None`` when
    the matrix is diagonal (no confusion at all).
    """
    c = confusion.shape[0]
    best, best_errors = None, 0
    for i in range(c):
        for j in range(i + 1, c):
            errors = int(confusion[i, j]) + int(confusion[j, i])
            if errors > best_errors:
                best, best_errors = (i, j), errors
    return best
