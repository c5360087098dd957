from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from drivebase.metrics import coarse_distance, coverage_weights, fine_distance
from drivebase.model import Series
from oracles import coarse_loop, fine_naive


def test_coarse_examples():
    assert coarse_distance([1, 2, 3], [1, 2, 3]) == 0
    assert coarse_distance([0, 1, 2], [1, 1, 1]) == 2


def test_coarse_euclidean_flag():
    assert coarse_distance([0, 0], [3, 4], euclidean=True) == 5.0
    assert coarse_distance([0, 0], [3, 4]) == 7.0


def test_coarse_length_mismatch():
    with pytest.raises(ValueError, match="segments must be aligned to equal length"):
        coarse_distance([1, 2], [1, 2, 3])


def test_coarse_accepts_series():
    s = Series("HR", [0.0, 1.0], [60.0, 62.0])
    assert coarse_distance(s, s.with_values([61.0, 61.0])) == 2.0


def test_coarse_matches_loop():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 101))
        q, r = rng.normal(size=n), rng.normal(size=n)
        assert coarse_distance(q, r) == pytest.approx(coarse_loop(q, r), rel=1e-12, abs=1e-12)


def test_fine_example():
    f = fine_distance([0, 0, 0, 0], [1, 0, 0, 1], 2)
    assert f.values.tolist() == [0, 1, 0]
    assert f.to_rows() == [(1, 0.0), (2, 1.0), (3, 0.0)]


def test_fine_identity_is_one():
    x = np.linspace(0, 5, 40)
    for w in (1, 5, 40):
        assert np.all(fine_distance(x, x, w).values == 1.0)


def test_fine_errors():
    with pytest.raises(ValueError, match="window exceeds segment length"):
        fine_distance([1, 2], [1, 2], 3)
    with pytest.raises(ValueError):
        fine_distance([1, 2], [1, 2], 0)


def test_fine_matches_naive():
    rng = np.random.default_rng(11)
    q, r = rng.normal(size=50), rng.normal(size=50)
    np.testing.assert_allclose(fine_distance(q, r, 10).values, fine_naive(q, r, 10), rtol=0, atol=1e-12)


def test_coverage_weights_small():
    assert coverage_weights(5, 2).tolist() == [1, 2, 2, 2, 1]
    assert coverage_weights(4, 4).tolist() == [1, 1, 1, 1]


pairs = st.integers(1, 60).flatmap(
    lambda n: st.tuples(
        arrays(np.float64, n, elements=st.floats(-100, 100)),
        arrays(np.float64, n, elements=st.floats(-100, 100)),
        arrays(np.float64, n, elements=st.floats(-100, 100)),
        st.integers(1, n),
    )
)


@given(pairs)
@settings(max_examples=200, deadline=None)
def test_metric_properties(args):
    q, r, s, w = args
    assert coarse_distance(q, r) >= 0
    assert coarse_distance(q, q) == 0
    assert coarse_distance(q, r) == coarse_distance(r, q)
    assert coarse_distance(q, s) <= coarse_distance(q, r) + coarse_distance(r, s) + 1e-12 * (
        1 + np.abs(q).sum() + np.abs(r).sum() + np.abs(s).sum())
    f = fine_distance(q, r, w)
    assert len(f) == q.size - w + 1
    assert np.all(f.values <= 1.0)
    lhs = float(np.sum(1.0 - f.values))
    rhs = float(np.sum(coverage_weights(q.size, w) * np.abs(r - q)))
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)
