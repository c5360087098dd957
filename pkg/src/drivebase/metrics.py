"""Distances between two aligned, equal-length series.

``coarse_distance`` is the summed per-sample deviation ``sum |r_j - q_j|``.
``fine_distance`` slides a window of ``w`` samples and reports
``1 - sum |r_j - q_j|`` per window, so lower values mean larger deviation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Series

DEFAULT_WINDOW = 10


@dataclass(frozen=True, eq=False)
class FineDistanceSeries:
    window: int
    values: np.ndarray

    def __len__(self) -> int:
        return self.values.size

    def to_rows(self) -> list[tuple[int, float]]:
        """``(i, s_i)`` rows with 1-based window index."""
        return [(i + 1, float(v)) for i, v in enumerate(self.values)]


def _values(x) -> np.ndarray:
    if isinstance(x, Series):
        return x.values
    return np.asarray(x, dtype=np.float64)


def _paired(q, r) -> tuple[np.ndarray, np.ndarray]:
    qv, rv = _values(q), _values(r)
    if qv.shape != rv.shape:
        raise ValueError(
            f"segments must be aligned to equal length (got {qv.size} and {rv.size})"
        )
    if qv.size < 1:
        raise ValueError("segments must be non-empty")
    return qv, rv


def coarse_distance(q, r, euclidean: bool = False) -> float:
    """Summed absolute deviation between two aligned segments.

    With ``euclidean=True`` the root of the summed squared deviation is
    returned instead; off by default.
    """
    qv, rv = _paired(q, r)
    if euclidean:
        return float(np.sqrt(np.sum((rv - qv) ** 2)))
    return float(np.sum(np.abs(rv - qv)))


def fine_distance(q, r, w: int = DEFAULT_WINDOW) -> FineDistanceSeries:
    qv, rv = _paired(q, r)
    n = qv.size
    if w < 1:
        raise ValueError(f"window must be at least 1 (got {w})")
    if w > n:
        raise ValueError(f"window exceeds segment length ({w} > {n})")
    dev = np.abs(rv - qv)
    # Rolling sums from a cumulative sum drift for long series; re-sum each window instead.
    windows = np.lib.stride_tricks.sliding_window_view(dev, w)
    values = 1.0 - windows.sum(axis=1)
    values.setflags(write=False)
    return FineDistanceSeries(window=int(w), values=values)


def coverage_weights(n: int, w: int) -> np.ndarray:
    """How many windows of size ``w`` cover each of ``n`` samples."""
    l = n - w + 1
    j = np.arange(1, n + 1)
    return np.minimum.reduce([j, np.full(n, w), np.full(n, l), n - j + 1])
