"""Before/during/after segmentation and route-feature extraction."""

from __future__ import annotations

from .model import SegmentedSeries, SegmentMarkers, Series, segment_labels


class DegenerateSegment(ValueError):
    pass


def split_segments(series: Series, markers: SegmentMarkers) -> SegmentedSeries:
    labels = segment_labels(series.times, markers)
    parts = []
    for code, name in enumerate(("before", "during", "after")):
        mask = labels == code
        if not mask.any():
            raise DegenerateSegment(f"degenerate segment: {name!r} of {series.channel!r} is empty")
        parts.append(series.slice(mask))
    return SegmentedSeries(*parts)


def extract_feature(series: Series, markers: SegmentMarkers, label: str) -> Series:
    try:
        feature = markers.feature(label)
    except KeyError:
        raise ValueError(f"feature not annotated: {label!r}") from None
    mask = (series.times >= feature.start) & (series.times < feature.end)
    if not mask.any():
        raise DegenerateSegment(
            f"degenerate segment: feature {label!r} [{feature.start}, {feature.end}) holds no samples"
        )
    return series.slice(mask)
