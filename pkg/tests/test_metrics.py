"""Heterogeneity measures and classification metrics."""

import math

import numpy as np
import pytest

from fedgpl.errors import DimMismatch, LengthMismatch, ShapeMismatch
from fedgpl.metrics import accuracy_f1, data_heterogeneity, task_heterogeneity


def test_cross_task_is_always_one():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = rng.normal(size=5), rng.normal(size=9)  # shapes may even differ
        assert task_heterogeneity(a, b, "node", "graph") == 1.0


def test_equal_params_same_task_is_zero():
    theta = np.arange(4.0)
    assert task_heterogeneity(theta, theta, "edge", "edge") == 0.0


def test_log3_deviation_hits_half():
    x = math.log(3.0)
    theta_a = np.zeros(7)
    theta_b = np.full(7, x)
    assert task_heterogeneity(theta_a, theta_b, "node", "node") == pytest.approx(0.5)


def test_task_heterogeneity_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        task_heterogeneity(np.zeros(2), np.zeros(3), "node", "node")


def test_equal_embeddings_give_zero():
    h = np.linspace(0, 1, 6)
    assert data_heterogeneity(h, h) == 0.0


def test_mean_square_2log3_hits_08():
    m = 2.0 * math.log(3.0)
    h_a = np.zeros(4)
    h_b = np.full(4, math.sqrt(m))
    assert data_heterogeneity(h_a, h_b) == pytest.approx(0.8)


def test_data_heterogeneity_stays_below_one():
    # strictly below 1 for any m small enough that float64 tanh has not
    # saturated; saturation kicks in near m/2 ~ 19
    for m in (1.0, 10.0, 36.0):
        h_b = np.full(3, math.sqrt(m))
        assert data_heterogeneity(np.zeros(3), h_b) < 1.0


def test_data_heterogeneity_dim_mismatch():
    with pytest.raises(DimMismatch):
        data_heterogeneity(np.zeros(2), np.zeros(3))


def test_both_measures_symmetric_and_monotone():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a, b = rng.normal(size=6), rng.normal(size=6)
        assert task_heterogeneity(a, b, "node", "node") == task_heterogeneity(
            b, a, "node", "node"
        )
        assert data_heterogeneity(a, b) == data_heterogeneity(b, a)
    scales = [0.1, 0.5, 1.0, 2.0]
    base = np.ones(5)
    dts = [task_heterogeneity(np.zeros(5), s * base, "node", "node") for s in scales]
    dds = [data_heterogeneity(np.zeros(5), s * base) for s in scales]
    assert dts == sorted(dts) and len(set(dts)) == len(dts)
    assert dds == sorted(dds) and len(set(dds)) == len(dds)


def test_all_correct_scores_perfect():
    assert accuracy_f1([0, 1, 2], [0, 1, 2], 3) == (1.0, 1.0)


def test_degenerate_binary_predictor():
    preds = [0, 0, 0, 0]
    labels = [0, 0, 1, 1]
    acc, f1 = accuracy_f1(preds, labels, 2)
    assert acc == 0.5
    assert f1 == pytest.approx(1.0 / 3.0)  # (2/3 for class 0, 0 for class 1) / 2


def test_absent_class_skipped():
    # class 2 never appears; macro averages over classes 0 and 1 only
    acc, f1 = accuracy_f1([0, 1], [0, 1], 3)
    assert (acc, f1) == (1.0, 1.0)


def test_diagonal_confusion_equates_f1_and_accuracy():
    rng = np.random.default_rng(2)
    labels = rng.integers(0, 4, size=50)
    acc, f1 = accuracy_f1(labels, labels, 4)
    assert acc == f1 == 1.0


def test_empty_and_mismatched_inputs_rejected():
    with pytest.raises(LengthMismatch):
        accuracy_f1([], [], 2)
    with pytest.raises(LengthMismatch):
        accuracy_f1([0, 1], [0], 2)


def test_f1_never_exceeds_one():
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(1, 30))
        preds = rng.integers(0, 3, size=n)
        labels = rng.integers(0, 3, size=n)
        acc, f1 = accuracy_f1(preds, labels, 3)
        assert 0.0 <= acc <= 1.0
        assert 0.0 <= f1 <= 1.0
