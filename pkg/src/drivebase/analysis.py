"""Baseline-referenced segment distances and the two paired experiment designs."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .dtw import AlignConfig, Alignment, align, map_index, warp_to_reference
from .metrics import DEFAULT_WINDOW, FineDistanceSeries, coarse_distance, fine_distance
from .model import (
    BASELINE,
    RouteFeature,
    SegmentMarkers,
    Series,
    Session,
    SessionType,
    Panel,
)
from .segmentation import DegenerateSegment, extract_feature, split_segments
from .stats import TestResult, paired_t_test, wilcoxon_signed_rank

log = logging.getLogger(__name__)

SEGMENTS = ("b", "d", "a")
TESTS = {"ttest": paired_t_test, "wilcoxon": wilcoxon_signed_rank}
DEFAULT_TEST = {"means": "ttest", "distances": "wilcoxon"}


# Drift allowed between a session and its baseline; unconstrained warping of
# structureless channels (HR) wanders by minutes and collapses segments.
DEFAULT_BAND_S = 10.0


class MissingBaseline(ValueError):
    pass


def default_align_config(query: Series, reference: Series, band_s: float | None = DEFAULT_BAND_S,
                         step_pattern: str = "symmetric_uniform") -> AlignConfig:
    """Sakoe-Chiba band of ``band_s`` seconds, widened to cover any length difference."""
    if band_s is None:
        return AlignConfig(step_pattern)
    step = reference.step if len(reference) > 1 else query.step
    radius = int(round(band_s / step)) if np.isfinite(step) else 0
    return AlignConfig(step_pattern, max(radius, abs(len(query) - len(reference))))


@dataclass(frozen=True, eq=False)
class SegmentDistanceReport:
    participant_id: str
    distraction_type: SessionType
    channel: str
    window: int
    coarse: dict[str, float]  # segment code -> coarse distance
    fine: dict[str, FineDistanceSeries]
    mapped_markers: SegmentMarkers
    dtw_distance: float
    features: dict[str, tuple[float, FineDistanceSeries]] = field(default_factory=dict)

    @property
    def delta_b(self) -> float:
        return self.coarse["b"]

    @property
    def delta_d(self) -> float:
        return self.coarse["d"]

    @property
    def delta_a(self) -> float:
        return self.coarse["a"]

    def to_dict(self, include_fine: bool = False) -> dict:
        out = {
            "kind": "segment_distances",
            "participant_id": self.participant_id,
            "distraction_type": self.distraction_type.value,
            "channel": self.channel,
            "window": self.window,
            "delta_b": self.delta_b,
            "delta_d": self.delta_d,
            "delta_a": self.delta_a,
            "dtw_distance": self.dtw_distance,
            "mapped_distraction_start_s": self.mapped_markers.distraction_start,
            "mapped_distraction_end_s": self.mapped_markers.distraction_end,
            "segment_lengths": {s: len(self.fine[s]) + self.window - 1 for s in SEGMENTS},
        }
        if self.features:
            out["features"] = {
                label: {"delta": c, **({"fine": f.values.tolist()} if include_fine else {})}
                for label, (c, f) in sorted(self.features.items())
            }
        if include_fine:
            out["fine"] = {s: self.fine[s].values.tolist() for s in SEGMENTS}
        return out


@dataclass(frozen=True)
class PanelSummary:
    distraction_type: str
    channel: str
    values: tuple[float, ...]
    mean: float
    stddev: float

    def to_dict(self) -> dict:
        return {
            "kind": "panel_summary",
            "distraction_type": self.distraction_type,
            "channel": self.channel,
            "values": list(self.values),
            "mean": self.mean,
            "stddev": self.stddev,
        }


@dataclass(frozen=True)
class SegmentStats:
    participant_id: str
    session: str
    channel: str
    segment: str
    mean: float
    variance: float


def _map_time(alignment: Alignment, query: Series, reference: Series, t: float) -> float:
    k = int(np.searchsorted(query.times, t, side="left"))
    if k >= len(query):
        raise DegenerateSegment(f"degenerate segment: marker {t} s lies after the session end")
    j = map_index(alignment, k + 1)
    return float(reference.times[j - 1])


def map_markers(alignment: Alignment, query: Series, reference: Series,
                markers: SegmentMarkers, features: bool = True) -> SegmentMarkers:
    """Carry the query's markers onto the reference timeline through the warping path.

    Route features that collapse to an empty interval are dropped with a warning.
    """
    start = _map_time(alignment, query, reference, markers.distraction_start)
    end = _map_time(alignment, query, reference, markers.distraction_end)
    feats = []
    for f in markers.features if features else ():
        fs = _map_time(alignment, query, reference, f.start)
        fe = _map_time(alignment, query, reference, f.end)
        if fs < fe:
            feats.append(RouteFeature(f.label, fs, fe))
        else:
            log.warning("route feature %r collapses on the reference timeline", f.label)
    if not start < end:
        raise DegenerateSegment("degenerate segment: distraction collapses on the reference timeline")
    return SegmentMarkers(start, end, tuple(feats))


def _zscore(x: Series, mean: float, sd: float) -> Series:
    return x.with_values((x.values - mean) / sd)


def segment_distances(
    session: Session,
    baseline: Session,
    channel: str,
    w: int = DEFAULT_WINDOW,
    config: AlignConfig | None = None,
    *,
    euclidean: bool = False,
    normalize: bool = False,
    include_features: bool = False,
    band_s: float | None = DEFAULT_BAND_S,
    step_pattern: str = "symmetric_uniform",
) -> SegmentDistanceReport:
    """Coarse and fine distances of each session segment from the baseline.

    The whole query channel is DTW-aligned and warped onto the baseline
    timeline first; both are then split at the session's markers (carried
    through the warping path) and compared segment by segment.  Without an
    explicit ``config`` the alignment uses a band of ``band_s`` seconds
    (see :func:`default_align_config`).
    """
    if baseline.session_type is not BASELINE:
        raise ValueError(f"baseline must be a DS4 session, got {baseline.session_type.value}")
    if session.markers is None:
        raise ValueError("session has no distraction markers")
    query, reference = session[channel], baseline[channel]
    alignment = align(query, reference, config or default_align_config(query, reference, band_s, step_pattern))
    warped = warp_to_reference(query, reference, alignment)
    mapped = map_markers(alignment, query, reference, session.markers, include_features)
    if normalize:
        mu, sd = float(reference.values.mean()), float(reference.values.std())
        if sd == 0:
            raise ValueError(f"cannot normalise constant baseline channel {channel!r}")
        warped, reference = _zscore(warped, mu, sd), _zscore(reference, mu, sd)
    q_parts = split_segments(warped, mapped)
    r_parts = split_segments(reference, mapped)
    coarse, fine = {}, {}
    for code, qs, rs in zip(SEGMENTS, q_parts, r_parts):
        coarse[code] = coarse_distance(qs, rs, euclidean=euclidean)
        fine[code] = fine_distance(qs, rs, w)
    features = {}
    if include_features:
        for f in mapped.features:
            qf = extract_feature(warped, mapped, f.label)
            rf = extract_feature(reference, mapped, f.label)
            features[f.label] = (coarse_distance(qf, rf, euclidean=euclidean), fine_distance(qf, rf, w))
    return SegmentDistanceReport(
        participant_id=session.participant_id,
        distraction_type=session.session_type,
        channel=channel,
        window=int(w),
        coarse=coarse,
        fine=fine,
        mapped_markers=mapped,
        dtw_distance=alignment.distance,
        features=features,
    )


def relative_difference(delta_b: float, delta_d: float) -> float:
    """Percent change of the during-distance relative to the before-distance."""
    if delta_b == 0:
        raise ValueError("degenerate baseline-before distance")
    return 100.0 * abs(delta_b - delta_d) / delta_b


def panel_summary(values, distraction, channel: str) -> PanelSummary:
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise ValueError("panel summary needs at least 2 values")
    return PanelSummary(
        distraction_type=SessionType(distraction).value,
        channel=channel,
        values=tuple(v.tolist()),
        mean=float(v.mean()),
        stddev=float(v.std(ddof=1)),
    )


def segment_stats(session: Session, channel: str) -> list[SegmentStats]:
    if session.markers is None:
        raise ValueError("session has no distraction markers")
    parts = split_segments(session[channel], session.markers)
    out = []
    for code, part in zip(SEGMENTS, parts):
        v = part.values
        var = float(v.var(ddof=1)) if v.size > 1 else 0.0
        out.append(SegmentStats(session.participant_id, session.session_type.value, channel,
                                code, float(v.mean()), var))
    return out


def _participant_sessions(panel: Panel, distraction: SessionType, channel: str,
                          allow_partial: bool) -> list[Session]:
    out = []
    for pid in panel.participants:
        s = panel.get(pid, distraction)
        if s is None:
            if allow_partial:
                log.warning("participant %s has no %s session; excluded", pid, distraction.value)
                continue
            raise ValueError(f"session {distraction.value} missing for participant {pid}")
        if channel not in s:
            log.warning("participant %s lacks channel %s in %s; excluded", pid, channel, distraction.value)
            continue
        out.append(s)
    return out


def means_pairs(panel: Panel, distraction, channel: str, allow_partial: bool = False):
    """Per-participant (mean before, mean during) of the unaligned session."""
    distraction = SessionType(distraction)
    before, during, ids = [], [], []
    for s in _participant_sessions(panel, distraction, channel, allow_partial):
        b, d, _ = segment_stats(s, channel)
        before.append(b.mean)
        during.append(d.mean)
        ids.append(s.participant_id)
    return ids, np.array(before), np.array(during)


def paired_design_means(panel: Panel, distraction, channel: str, test: str = "ttest",
                        allow_partial: bool = False) -> TestResult:
    """Before/during means compared across participants; baselines are not used."""
    _, before, during = means_pairs(panel, distraction, channel, allow_partial)
    return TESTS[test](before, during, design="means")


def distance_reports(panel: Panel, distraction, channel: str, w: int = DEFAULT_WINDOW,
                     config: AlignConfig | None = None, allow_partial: bool = False,
                     **kwargs) -> list[SegmentDistanceReport]:
    distraction = SessionType(distraction)
    reports = []
    for s in _participant_sessions(panel, distraction, channel, allow_partial):
        pid = s.participant_id
        base = panel.get(pid, BASELINE)
        try:
            if base is None:
                raise MissingBaseline(f"baseline DS4 missing for participant {pid}")
            if channel not in base:
                log.warning("participant %s baseline lacks channel %s; excluded", pid, channel)
                continue
            reports.append(segment_distances(s, base, channel, w, config, **kwargs))
        except ValueError as exc:
            if not allow_partial:
                raise
            log.warning("participant %s excluded from %s/%s: %s", pid, distraction.value, channel, exc)
    return reports


def paired_design_distances(panel: Panel, distraction, channel: str, w: int = DEFAULT_WINDOW,
                            test: str = "wilcoxon", config: AlignConfig | None = None,
                            allow_partial: bool = False) -> TestResult:
    """Per-participant (before, during) distances from the baseline, compared pairwise."""
    reports = distance_reports(panel, distraction, channel, w, config, allow_partial)
    return compare_distances(reports, test)


def compare_distances(reports: list[SegmentDistanceReport], test: str = "wilcoxon") -> TestResult:
    db = np.array([r.delta_b for r in reports])
    dd = np.array([r.delta_d for r in reports])
    return TESTS[test](db, dd, design="distances")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))
