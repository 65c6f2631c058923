"""Moving-block bootstrap resampling of time-series means.

Resample means are computed from prefix sums: a length-P resample is a
concatenation of ceil(P / l) blocks with uniform starts, truncated to P,
so its mean is a sum of block sums plus one partial block. The same start
indices can be shared across the columns of a loss matrix, preserving
cross-model dependence.
"""

from __future__ import annotations

import math

import numpy as np


def default_block_length(P: int) -> int:
    """Cube-root rule, clamped to [1, P]."""
    return max(1, min(P, math.ceil(P ** (1.0 / 3.0))))


def block_starts(P: int, block_length: int, B: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform block start indices, shape (B, ceil(P / block_length))."""
    if not 1 <= block_length <= P:
        raise ValueError(f"block length must lie in [1, {P}], got {block_length}")
    k = -(-P // block_length)
    return rng.integers(0, P - block_length + 1, size=(B, k))


def resample_means(values: np.ndarray, block_length: int, starts: np.ndarray) -> np.ndarray:
    """Means of block resamples of ``values`` (1-D) or of each column (2-D).

    Returns shape (B,) for 1-D input and (B, m) for 2-D input.
    """
    values = np.asarray(values, dtype=float)
    squeeze = values.ndim == 1
    if squeeze:
        values = values[:, None]
    P = values.shape[0]
    B, k = starts.shape
    csum = np.vstack([np.zeros((1, values.shape[1])), np.cumsum(values, axis=0)])
    full = csum[starts[:, :-1] + block_length] - csum[starts[:, :-1]]
    tail_len = P - (k - 1) * block_length
    partial = csum[starts[:, -1] + tail_len] - csum[starts[:, -1]]
    means = (full.sum(axis=1) + partial) / P
    return means[:, 0] if squeeze else means
