from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drivebase.model import RouteFeature, SegmentMarkers, Series
from drivebase.segmentation import DegenerateSegment, extract_feature, split_segments


def test_half_open_boundaries():
    s = Series("VS", np.arange(10.0), np.arange(10.0))
    before, during, after = split_segments(s, SegmentMarkers(3.0, 7.0))
    assert before.times.tolist() == [0, 1, 2]
    assert during.times.tolist() == [3, 4, 5, 6]
    assert after.times.tolist() == [7, 8, 9]


def test_start_at_first_sample_is_degenerate():
    s = Series("VS", np.arange(10.0), np.arange(10.0))
    with pytest.raises(DegenerateSegment, match="degenerate segment"):
        split_segments(s, SegmentMarkers(0.0, 7.0))


def test_extract_feature_10hz():
    t = np.arange(3000) / 10.0
    s = Series("Steering", t, np.zeros(t.size))
    m = SegmentMarkers(90.0, 200.0, (RouteFeature("curve", 100.0, 130.0),))
    assert len(extract_feature(s, m, "curve")) == 300


def test_extract_feature_errors():
    s = Series("Steering", np.arange(10.0), np.zeros(10))
    m = SegmentMarkers(2.0, 8.0, (RouteFeature("curve", 3.2, 3.8),))
    with pytest.raises(ValueError, match="feature not annotated"):
        extract_feature(s, m, "straight")
    with pytest.raises(DegenerateSegment):
        extract_feature(s, m, "curve")


@given(st.integers(3, 80), st.data())
@settings(max_examples=150, deadline=None)
def test_partition_properties(n, data):
    a = data.draw(st.integers(1, n - 2))
    b = data.draw(st.integers(a + 1, n - 1))
    t = np.arange(n) * 0.1
    s = Series("HR", t, np.random.default_rng(n).normal(size=n))
    parts = split_segments(s, SegmentMarkers(t[a], t[b]))
    assert [len(p) for p in parts] == [a, b - a, n - b]
    assert np.array_equal(parts.concatenated(), s.values)
