"""Laplace mechanism: moments, determinism, scale behavior."""

import numpy as np
import pytest

from fedgpl.errors import InvalidParam, NonFiniteInput
from fedgpl.privacy import PrivacyConfig, laplace_noise, laplace_privatize


def cfg(eps=1.0, **kw):
    return PrivacyConfig(epsilon=eps, enabled=True, **kw)


def test_disabled_is_identity():
    x = np.arange(6.0).reshape(2, 3)
    out = laplace_privatize(x, PrivacyConfig(enabled=False), "s")
    assert np.array_equal(out, x)


def test_constant_tensor_unchanged():
    x = np.full((4, 4), 7.0)
    out = laplace_privatize(x, cfg(), "s")
    assert np.array_equal(out, x)


def test_huge_epsilon_approaches_identity():
    rng = np.random.default_rng(0)
    x = rng.normal(size=100)
    out = laplace_privatize(x, cfg(eps=1e9), "s")
    assert np.max(np.abs(out - x)) < 1e-6


def test_noise_moments_match_laplace():
    # unit population variance input, eps=1 -> lam=1 -> noise var 2*lam^2=2
    n = 1_000_000
    x = np.array([-1.0, 1.0] * (n // 2))
    out = laplace_privatize(x, cfg(eps=1.0, seed=0), "moments")
    noise = out - x
    assert abs(noise.mean()) < 4.0 / np.sqrt(n)
    assert abs(noise.var() - 2.0) / 2.0 < 0.05


def test_noise_scale_shrinks_with_epsilon():
    rng = np.random.default_rng(1)
    x = rng.normal(size=20_000)
    spreads = []
    for eps in (0.1, 1.0, 10.0):
        noise = laplace_privatize(x, cfg(eps=eps, seed=5), "trend") - x
        spreads.append(np.abs(noise).mean())
    assert spreads[0] > spreads[1] > spreads[2]


def test_same_stream_reproduces_bitwise():
    x = np.linspace(0, 1, 50)
    a = laplace_privatize(x, cfg(seed=9), "alpha")
    b = laplace_privatize(x, cfg(seed=9), "alpha")
    assert np.array_equal(a, b)


def test_distinct_streams_differ():
    x = np.linspace(0, 1, 50)
    a = laplace_privatize(x, cfg(seed=9), "alpha")
    b = laplace_privatize(x, cfg(seed=9), "beta")
    c = laplace_privatize(x, cfg(seed=10), "alpha")
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)
    # and independence in the correlation sense
    na, nb = a - x, b - x
    assert abs(np.corrcoef(na, nb)[0, 1]) < 0.5


def test_scale_invariant_to_constant_shift():
    rng = np.random.default_rng(2)
    x = rng.normal(size=200)
    n1 = laplace_privatize(x, cfg(seed=7), "shift") - x
    n2 = laplace_privatize(x + 100.0, cfg(seed=7), "shift") - (x + 100.0)
    assert np.allclose(n1, n2)


def test_range_variation_option():
    x = np.array([0.0, 4.0])  # range 4, std 2
    n_std = laplace_privatize(x, cfg(seed=11), "v") - x
    n_rng = laplace_privatize(x, cfg(seed=11, variation="range"), "v") - x
    assert np.allclose(n_rng, 2.0 * n_std)


def test_non_finite_rejected():
    with pytest.raises(NonFiniteInput):
        laplace_privatize(np.array([1.0, np.nan]), cfg(), "s")


def test_bad_config_rejected():
    with pytest.raises(InvalidParam):
        PrivacyConfig(epsilon=0.0, enabled=True)
    with pytest.raises(InvalidParam):
        PrivacyConfig(variation="iqr")


def test_noise_shape_follows_input():
    out = laplace_noise((3, 4), 1.0, 0, "s")
    assert out.shape == (3, 4)
    flat = laplace_noise((12,), 1.0, 0, "s")
    assert np.allclose(out.ravel(), flat)
