"""Panel-wide analysis runs, their JSON report and the CSV tables."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field

from . import __version__
from .analysis import (
    DEFAULT_BAND_S,
    DEFAULT_TEST,
    TESTS,
    MissingBaseline,
    PanelSummary,
    SegmentDistanceReport,
    compare_distances,
    distance_reports,
    means_pairs,
    panel_summary,
    relative_difference,
    round_half_up,
)
from .dtw import AlignConfig
from .metrics import DEFAULT_WINDOW
from .model import CHANNELS, DISTRACTIONS, Panel, SessionType, natural_key

log = logging.getLogger(__name__)

MEANS_CHANNELS = ("HR", "Brake", "VS", "RPM")
DISTANCE_CHANNELS = CHANNELS
RELATIVE_CHANNELS = ("HR", "VS", "Brake")
DESIGNS = ("means", "distances")
# Significance is reported in two tiers rather than at a single cutoff.
SIGNIFICANCE_TIERS = ((0.05, "p<0.05"), (0.10, "p<0.10"))


def version_stamp() -> str:
    return f"drivebase {__version__}"


@dataclass
class TestCell:
    design: str
    distraction: str
    channel: str
    test: str
    result: object = None  # stats.TestResult or None
    error: str | None = None

    __test__ = False

    @property
    def p_value(self) -> float | None:
        return None if self.result is None else self.result.p_value

    @property
    def significance(self) -> str | None:
        return significance_tier(self.p_value)

    def to_dict(self) -> dict:
        out = {
            "kind": "test_result",
            "design": self.design,
            "distraction_type": self.distraction,
            "channel": self.channel,
            "test": self.test,
            "error": self.error,
            "significance": self.significance,
        }
        if self.result is not None:
            r = self.result
            out.update(statistic=r.statistic, p_value=r.p_value, n_effective=r.n_effective,
                       n=r.n, df=r.df, method=r.method, test_name=r.test)
        else:
            out.update(statistic=None, p_value=None, n_effective=0, n=0, df=None, method=None,
                       test_name=None)
        return out


@dataclass
class PanelReport:
    participants: list[str]
    distractions: list[str]
    designs: list[str]
    tests: dict[str, str]
    window: int
    band: str
    step_pattern: str
    means_channels: list[str]
    distance_channels: list[str]
    relative_channels: list[str]
    cells: list[TestCell] = field(default_factory=list)
    distances: list[SegmentDistanceReport] = field(default_factory=list)
    relative: dict[tuple[str, str, str], float | None] = field(default_factory=dict)
    summaries: list[PanelSummary] = field(default_factory=list)
    segment_means: list[dict] = field(default_factory=list)

    def cell(self, design: str, distraction: str, channel: str) -> TestCell | None:
        for c in self.cells:
            if (c.design, c.distraction, c.channel) == (design, distraction, channel):
                return c
        return None

    def summary(self, distraction: str, channel: str) -> PanelSummary | None:
        for s in self.summaries:
            if (s.distraction_type, s.channel) == (distraction, channel):
                return s
        return None

    def to_dict(self) -> dict:
        distances = []
        for r in self.distances:
            d = r.to_dict()
            d["relative_difference_pct"] = self.relative.get(
                (r.participant_id, r.distraction_type.value, r.channel))
            distances.append(d)
        return {
            "version": version_stamp(),
            "config": {
                "participants": self.participants,
                "distractions": self.distractions,
                "designs": self.designs,
                "tests": self.tests,
                "window": self.window,
                "band": self.band,
                "step_pattern": self.step_pattern,
                "means_channels": self.means_channels,
                "distance_channels": self.distance_channels,
            },
            "segment_means": self.segment_means,
            "segment_distances": distances,
            "panel_summaries": [s.to_dict() for s in self.summaries],
            "tests": [c.to_dict() for c in self.cells],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _available(panel: Panel, channels) -> list[str]:
    present = set()
    for s in panel:
        present.update(s.channels)
    return [c for c in channels if c in present]


def analyze_panel(
    panel: Panel,
    designs=DESIGNS,
    test: str | None = None,
    w: int = DEFAULT_WINDOW,
    config: AlignConfig | None = None,
    band_s: float | None = DEFAULT_BAND_S,
    step_pattern: str = "symmetric_uniform",
    distractions=DISTRACTIONS,
    means_channels=MEANS_CHANNELS,
    distance_channels=DISTANCE_CHANNELS,
    relative_channels=RELATIVE_CHANNELS,
    allow_partial: bool = False,
) -> PanelReport:
    """Run the requested paired designs over every (distraction, channel) cell.

    ``test`` overrides the per-design default (t-test for means, Wilcoxon for
    distances).  A test that cannot be computed for a cell, e.g. all
    differences zero, is recorded as that cell's error; data problems such as
    a missing baseline raise.
    """
    designs = [d for d in DESIGNS if d in designs]
    if not designs:
        raise ValueError("no design selected")
    tests = {d: test or DEFAULT_TEST[d] for d in designs}
    for name in tests.values():
        if name not in TESTS:
            raise ValueError(f"unknown test {name!r}")
    distractions = [SessionType(d).value for d in distractions]
    if config is not None:
        band = "none" if config.band_radius is None else f"{config.band_radius} samples"
        step_pattern = config.step_pattern.value
    else:
        band = "none" if band_s is None else f"{band_s:g} s"
    report = PanelReport(
        participants=panel.participants,
        distractions=distractions,
        designs=designs,
        tests=tests,
        window=int(w),
        band=band,
        step_pattern=step_pattern,
        means_channels=_available(panel, means_channels) if "means" in designs else [],
        distance_channels=_available(panel, distance_channels) if "distances" in designs else [],
        relative_channels=[c for c in relative_channels if c in _available(panel, distance_channels)]
        if "distances" in designs else [],
    )

    if "distances" in designs:
        missing = [p for p in panel.participants if panel.get(p, SessionType.DS4) is None]
        if missing and not allow_partial:
            raise MissingBaseline(f"baseline DS4 missing for participant {', '.join(missing)}")

    for dist in distractions:
        if all(panel.get(p, dist) is None for p in panel.participants):
            log.warning("no %s sessions in panel", dist)
            continue
        if "means" in designs:
            for ch in report.means_channels:
                cell = TestCell("means", dist, ch, tests["means"])
                ids, before, during = means_pairs(panel, dist, ch, allow_partial)
                for pid, b, d in zip(ids, before, during):
                    report.segment_means.append(
                        {"participant_id": pid, "distraction_type": dist, "channel": ch,
                         "mean_b": float(b), "mean_d": float(d)})
                try:
                    cell.result = TESTS[tests["means"]](before, during, design="means")
                except ValueError as exc:
                    cell.error = str(exc)
                report.cells.append(cell)
        if "distances" in designs:
            for ch in report.distance_channels:
                cell = TestCell("distances", dist, ch, tests["distances"])
                reports = distance_reports(panel, dist, ch, w, config, allow_partial,
                                           band_s=band_s, step_pattern=step_pattern)
                report.distances.extend(reports)
                for r in reports:
                    try:
                        rel = relative_difference(r.delta_b, r.delta_d)
                    except ValueError:
                        rel = None
                    report.relative[(r.participant_id, dist, ch)] = rel
                try:
                    cell.result = compare_distances(reports, tests["distances"])
                except ValueError as exc:
                    cell.error = str(exc)
                report.cells.append(cell)
                if ch in report.relative_channels:
                    vals = [report.relative[(r.participant_id, dist, ch)] for r in reports]
                    vals = [v for v in vals if v is not None]
                    if len(vals) >= 2:
                        report.summaries.append(panel_summary(vals, dist, ch))
    return report


def significance_tier(p: float | None) -> str | None:
    if p is None:
        return None
    for cutoff, label in SIGNIFICANCE_TIERS:
        if p < cutoff:
            return label
    return "ns"


def format_p(p: float | None) -> str:
    """p-value in the style of the published tables: 0.24, 0.002, 9E-06."""
    if p is None:
        return "NA"
    if p >= 0.01:
        return f"{p:.2f}"
    if p >= 0.001:
        return f"{p:.3f}"
    return f"{p:.0E}"


def _fmt_int(x: float | None) -> str:
    return "NA" if x is None else str(round_half_up(x))


def _csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def relative_table(report: PanelReport, distraction: str) -> str:
    chans = report.relative_channels
    rows = [["participant", *chans]]
    for pid in report.participants:
        rows.append([pid, *(_fmt_int(report.relative.get((pid, distraction, c))) for c in chans)])
    sums = [report.summary(distraction, c) for c in chans]
    rows.append(["avg", *(_fmt_int(s.mean if s else None) for s in sums)])
    rows.append(["stddev", *(_fmt_int(s.stddev if s else None) for s in sums)])
    return _csv(rows)


def summary_table(report: PanelReport) -> str:
    chans = report.relative_channels
    rows = [["distraction", *(f"{c}_{stat}" for c in chans for stat in ("mean", "stddev"))]]
    for dist in report.distractions:
        row = [dist]
        for c in chans:
            s = report.summary(dist, c)
            row += [_fmt_int(s.mean if s else None), _fmt_int(s.stddev if s else None)]
        rows.append(row)
    return _csv(rows)


def pvalue_table(report: PanelReport, design: str) -> str:
    chans = report.means_channels if design == "means" else report.distance_channels
    rows = [["distraction", *chans]]
    for dist in report.distractions:
        row = [dist]
        for c in chans:
            cell = report.cell(design, dist, c)
            row.append(format_p(cell.p_value if cell else None))
        rows.append(row)
    return _csv(rows)


def render_tables(report: PanelReport) -> dict[str, str]:
    """CSV text keyed by table name."""
    tables = {}
    if "means" in report.designs:
        tables["pvalues_means"] = pvalue_table(report, "means")
    if "distances" in report.designs:
        for dist in report.distractions:
            tables[f"relative_distances_{dist}"] = relative_table(report, dist)
        tables["summary_relative_distances"] = summary_table(report)
        tables["pvalues_distances"] = pvalue_table(report, "distances")
    return dict(sorted(tables.items(), key=lambda kv: natural_key(kv[0])))
