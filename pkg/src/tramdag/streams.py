"""Deterministic random substreams.

Every sampling routine in the package draws from a counter-based
generator keyed by (seed, tags...).  A node's stream never depends on
how many draws other nodes consumed, so re-sampling with one node
pinned by an intervention reuses identical exogenous noise everywhere
else.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "substream",
    "uniforms",
    "standard_logistic",
    "standard_normal",
    "laplace",
]

_TINY = 2.0 ** -53


def _mix(h: int, v: int) -> int:
    # splitmix64 finalizer, keeps tag combinations well separated
    h = (h + 0x9E3779B97F4A7C15 + v) & 0xFFFFFFFFFFFFFFFF
    h = ((h ^ (h >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    h = ((h ^ (h >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return h ^ (h >> 31)


def substream(seed: int, *tags: int) -> np.random.Generator:
    """A Philox generator keyed by the seed and integer tags."""
    key = _mix(seed & 0xFFFFFFFFFFFFFFFF, 0x5851F42D4C957F2D)
    for t in tags:
        key = _mix(key, t & 0xFFFFFFFFFFFFFFFF)
    return np.random.Generator(np.random.Philox(key=key))


def uniforms(gen: np.random.Generator, size) -> np.ndarray:
    """Uniform draws clipped into the open interval (0, 1)."""
    u = gen.random(size)
    return np.clip(u, _TINY, 1.0 - _TINY)


def standard_logistic(gen: np.random.Generator, size) -> np.ndarray:
    u = uniforms(gen, size)
    return np.log(u) - np.log1p(-u)


def standard_normal(gen: np.random.Generator, size) -> np.ndarray:
    """Box-Muller transform of paired uniforms."""
    u1 = uniforms(gen, size)
    u2 = gen.random(size)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def laplace(gen: np.random.Generator, size, scale: float = 1.0) -> np.ndarray:
    """Inverse-CDF Laplace draws with location zero."""
    u = uniforms(gen, size) - 0.5
    return -scale * np.sign(u) * np.log1p(-2.0 * np.abs(u))
