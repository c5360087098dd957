"""Dynamic time warping of a query series onto a reference series.

Local cost is the absolute difference ``|q_i - r_j|``.  Two step patterns are
available:

``symmetric_uniform``
    steps (1,1), (1,0), (0,1), each adding the local cost once.
``symmetric_diag2``
    as above but the diagonal step adds the local cost twice.

Paths are reported 1-based as ``(query_index, reference_index)`` pairs.  When
two predecessors give the same accumulated cost the backtrack prefers the
diagonal, then the vertical step (query advances), then the horizontal one.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numba
import numpy as np

from .model import Series

_DIAG, _VERT, _HORIZ = 1, 2, 3


class StepPattern(str, Enum):
    SYMMETRIC_UNIFORM = "symmetric_uniform"
    SYMMETRIC_DIAG2 = "symmetric_diag2"

    @property
    def diagonal_weight(self) -> float:
        return 2.0 if self is StepPattern.SYMMETRIC_DIAG2 else 1.0


@dataclass(frozen=True)
class AlignConfig:
    step_pattern: StepPattern = StepPattern.SYMMETRIC_UNIFORM
    band_radius: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "step_pattern", StepPattern(self.step_pattern))
        if self.band_radius is not None and self.band_radius < 0:
            raise ValueError("band_radius must be non-negative")


@dataclass(frozen=True, eq=False)
class Alignment:
    path: np.ndarray  # (k, 2) int64, 1-based (query_index, reference_index)
    distance: float

    @property
    def query_indices(self) -> np.ndarray:
        return self.path[:, 0]

    @property
    def reference_indices(self) -> np.ndarray:
        return self.path[:, 1]

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(i), int(j)) for i, j in self.path]

    def __len__(self) -> int:
        return self.path.shape[0]


@numba.njit(cache=True, nogil=True)
def _accumulate(q, r, diag_weight, band):
    n, m = q.shape[0], r.shape[0]
    steps = np.zeros((n, m), dtype=np.int8)
    prev = np.full(m, np.inf)
    cur = np.full(m, np.inf)
    for i in range(n):
        lo, hi = 0, m
        if band >= 0:
            lo = max(0, i - band)
            hi = min(m, i + band + 1)
        for j in range(m):
            cur[j] = np.inf
        for j in range(lo, hi):
            d = abs(q[i] - r[j])
            if i == 0 and j == 0:
                cur[0] = d
                continue
            best = np.inf
            step = 0
            if i > 0 and j > 0:
                best = prev[j - 1] + diag_weight * d
                step = _DIAG
            if i > 0:
                v = prev[j] + d
                if v < best:
                    best = v
                    step = _VERT
            if j > 0:
                v = cur[j - 1] + d
                if v < best:
                    best = v
                    step = _HORIZ
            cur[j] = best
            steps[i, j] = step
        prev, cur = cur, prev
    return prev[m - 1], steps


@numba.njit(cache=True, nogil=True)
def _backtrack(steps):
    n, m = steps.shape
    i, j = n - 1, m - 1
    out = np.empty((n + m - 1, 2), dtype=np.int64)
    k = 0
    while True:
        out[k, 0] = i + 1
        out[k, 1] = j + 1
        k += 1
        if i == 0 and j == 0:
            break
        s = steps[i, j]
        if s == _DIAG:
            i -= 1
            j -= 1
        elif s == _VERT:
            i -= 1
        else:
            j -= 1
    return out[:k][::-1].copy()


def _as_values(x) -> np.ndarray:
    if isinstance(x, Series):
        return x.values
    return np.asarray(x, dtype=np.float64)


def align(query, reference, config: AlignConfig | None = None) -> Alignment:
    """Optimal DTW alignment of ``query`` against ``reference``.

    Accepts :class:`Series` or plain sequences of numbers.
    """
    config = config or AlignConfig()
    q = np.ascontiguousarray(_as_values(query), dtype=np.float64)
    r = np.ascontiguousarray(_as_values(reference), dtype=np.float64)
    if q.size == 0 or r.size == 0:
        raise ValueError("cannot align an empty series")
    band = -1
    if config.band_radius is not None:
        band = int(config.band_radius)
        if band < abs(q.size - r.size):
            raise ValueError(
                f"infeasible band: radius {band} < length difference {abs(q.size - r.size)}"
            )
    distance, steps = _accumulate(q, r, config.step_pattern.diagonal_weight, band)
    path = _backtrack(steps)
    return Alignment(path=path, distance=float(distance))


def check_path(alignment: Alignment, n_query: int, n_reference: int) -> None:
    path = alignment.path
    if path.ndim != 2 or path.shape[1] != 2 or path.shape[0] == 0:
        raise ValueError("alignment path must be a non-empty list of index pairs")
    if tuple(path[0]) != (1, 1) or tuple(path[-1]) != (n_query, n_reference):
        raise ValueError(
            f"alignment path runs {tuple(path[0])}..{tuple(path[-1])}, "
            f"expected (1, 1)..({n_query}, {n_reference})"
        )
    d = np.diff(path, axis=0)
    ok = ((d == 0) | (d == 1)).all(axis=1) & (d.sum(axis=1) > 0)
    if not ok.all():
        raise ValueError("alignment path contains an invalid step")


def warp_to_reference(query, reference: Series, alignment: Alignment) -> Series:
    """Project ``query`` onto the reference timeline along ``alignment``.

    Each reference sample receives the mean of every query value matched to it.
    """
    q = _as_values(query)
    check_path(alignment, q.size, len(reference))
    j = alignment.reference_indices - 1
    sums = np.bincount(j, weights=q[alignment.query_indices - 1], minlength=len(reference))
    counts = np.bincount(j, minlength=len(reference))
    channel = query.channel if isinstance(query, Series) else reference.channel
    return Series(channel, reference.times, sums / counts)


def map_index(alignment: Alignment, query_index: int) -> int:
    """Reference index (1-based) of the earliest path pair holding ``query_index``."""
    qi = alignment.query_indices
    k = int(np.searchsorted(qi, query_index, side="left"))
    if k >= qi.size or qi[k] != query_index:
        raise ValueError(f"query index {query_index} not on the alignment path")
    return int(alignment.reference_indices[k])
