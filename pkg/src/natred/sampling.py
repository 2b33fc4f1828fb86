"""Counter-based random streams: sample k depends only on (seed, k)."""
from __future__ import annotations

import numpy as np

__all__ = ["DEFAULT_SEED", "stream", "sphere_points", "tangent_params"]

DEFAULT_SEED = 20240101


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for item ``index``, stable under any partition of the work."""
    return np.random.Generator(np.random.Philox(key=int(seed) % 2 ** 64, counter=[0, 0, 0, int(index)]))


def sphere_points(seed: int, count: int, dim: int = 8) -> np.ndarray:
    out = np.empty((count, dim))
    for k in range(count):
        v = stream(seed, k).normal(size=dim)
        out[k] = v / np.linalg.norm(v)
    return out


def tangent_params(seed: int, count: int, lo: float = 0.25, hi: float = 3.0) -> list[tuple[float, float]]:
    """(a, b) pairs with |a| in [lo, hi] and b in [-hi, hi], a of either sign."""
    out = []
    for k in range(count):
        g = stream(seed, k)
        a = g.uniform(lo, hi) * g.choice([-1.0, 1.0])
        b = g.uniform(-hi, hi)
        out.append((float(a), float(b)))
    return out
