"""Heterogeneity and classification metrics.

Task heterogeneity is 1 across task levels and a logistic-of-mean-deviation
within one level; data heterogeneity maps the mean squared embedding gap
through tanh(m/2), keeping the value in [0, 1). Macro-F1 skips classes that
appear in neither the predictions nor the labels.
"""

from __future__ import annotations

import numpy as np

from .errors import DimMismatch, LengthMismatch, ShapeMismatch


def _flat(x) -> np.ndarray:
    data = getattr(x, "data", x)
    return np.asarray(data, dtype=np.float64).ravel()


def task_heterogeneity(theta_a, theta_b, task_a: str, task_b: str) -> float:
    """Delta_T: 1 across tasks, else (1 - e^-x) / (1 + e^-x), x = mean |difference|."""
    if task_a != task_b:
        return 1.0
    a, b = _flat(theta_a), _flat(theta_b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"parameter shapes differ: {a.shape} vs {b.shape}")
    x = float(np.abs(a - b).mean())
    return float(np.tanh(x / 2.0))


def data_heterogeneity(h_a, h_b) -> float:
    """Delta_D: tanh(m/2) with m the mean squared embedding difference."""
    a, b = _flat(h_a), _flat(h_b)
    if a.shape != b.shape:
        raise DimMismatch(f"embedding dims differ: {a.shape} vs {b.shape}")
    m = float(((a - b) ** 2).mean())
    return float(np.tanh(m / 2.0))


def accuracy_f1(preds, labels, n_classes: int) -> tuple[float, float]:
    """Accuracy and macro-F1.

    Per-class F1 uses 0 when precision + recall is 0; classes absent from both
    preds and labels are excluded from the macro average.
    """
    p = np.asarray(preds, dtype=np.int64).ravel()
    y = np.asarray(labels, dtype=np.int64).ravel()
    if p.shape != y.shape or p.shape[0] == 0:
        raise LengthMismatch(f"preds {p.shape} vs labels {y.shape} (both nonempty required)")
    acc = float((p == y).mean())
    f1s = []
    for cls in range(n_classes):
        tp = int(((p == cls) & (y == cls)).sum())
        fp = int(((p == cls) & (y != cls)).sum())
        fn = int(((p != cls) & (y == cls)).sum())
        if tp + fp + fn == 0:
            continue  # class absent everywhere: skipped, not counted as 0
        f1s.append(2 * tp / (2 * tp + fp + fn) if tp else 0.0)
    return acc, float(np.mean(f1s)) if f1s else 0.0
