"""Deterministic pseudo-randomness based on splitmix64.

Every random draw in the package (error sampling, weight perturbations,
per-shot seed derivation) goes through these helpers so that results are
bit-reproducible across platforms, numpy versions, and worker counts.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GENERATOR_NAME = "splitmix64"

_INC = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """One splitmix64 output step for the 64-bit state ``x``."""
    x = (x + _INC) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return (z ^ (z >> 31)) & MASK64


def mix64(*parts: int) -> int:
    """Fold integers into a single 64-bit value (order-sensitive)."""
    h = 0x243F6A8885A308D3
    for p in parts:
        h = splitmix64(h ^ (int(p) & MASK64))
    return h


def uniforms(seed: int, n: int) -> np.ndarray:
    """``n`` uniform float64 draws in [0, 1) from a 64-bit seed.

    Vectorized splitmix64 over a counter array; draw ``i`` depends only on
    ``(seed, i)``.
    """
    x = (np.uint64(seed & MASK64) + (np.arange(1, n + 1, dtype=np.uint64))
         * np.uint64(_INC))
    z = x
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MUL1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MUL2)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)
