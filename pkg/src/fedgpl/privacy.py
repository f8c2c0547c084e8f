"""Laplace privatization for tensors crossing the client/server boundary.

Noise scale follows the data: lambda = variation(x) / epsilon, where the
variation is the population standard deviation by default (swappable to
range). Sampling is counter-based so any (seed, stream_id) pair replays
bit-for-bit regardless of call order.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParam, NonFiniteInput


@dataclass
class PrivacyConfig:
    epsilon: float = 1.0
    enabled: bool = False
    seed: int = 0
    variation: str = "std"  # or "range"
    dp_on_params: bool = False

    def __post_init__(self):
        if self.enabled and not self.epsilon > 0:
            raise InvalidParam("epsilon must be positive when privacy is enabled")
        if self.variation not in ("std", "range"):
            raise InvalidParam(f"unknown variation {self.variation!r}")


def _variation(x, kind):
    if kind == "range":
        return float(x.max() - x.min())
    return float(x.std())


def _stream(seed, stream_id, n):
    digest = hashlib.sha256(f"{seed}:{stream_id}".encode()).digest()
    words = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=words)).random(n)


def laplace_noise(shape, lam, seed, stream_id):
    """Laplace(0, lam) array via inverse CDF over a keyed uniform stream."""
    n = int(np.prod(shape, dtype=np.int64)) if shape else 1
    u = _stream(seed, stream_id, n) - 0.5
    # u in [-0.5, 0.5); keep the log argument strictly positive
    mag = np.clip(1.0 - 2.0 * np.abs(u), 1e-300, None)
    return (-lam * np.sign(u) * np.log(mag)).reshape(shape)


def laplace_privatize(x, cfg, stream_id):
    """Return x + Laplace noise scaled to x's variation over cfg.epsilon.

    Identity when privacy is disabled or the input has zero variation.
    """
    x = np.asarray(x, dtype=np.float64)
    if not np.isfinite(x).all():
        raise NonFiniteInput("cannot privatize non-finite values")
    if not cfg.enabled or x.size == 0:
        return x
    lam = _variation(x, cfg.variation) / cfg.epsilon
    if lam == 0.0:
        return x
    return x + laplace_noise(x.shape, lam, cfg.seed, stream_id)
