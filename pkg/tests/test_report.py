from __future__ import annotations

import csv
import io
import json

import pytest

from drivebase.analysis import MissingBaseline
from drivebase.model import Panel
from drivebase.report import analyze_panel, format_p, render_tables, significance_tier


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture(scope="module")
def report(small_panel):
    return analyze_panel(small_panel.panel, distractions=("DS1",))


def test_format_p():
    assert format_p(0.2412) == "0.24"
    assert format_p(0.0023) == "0.002"
    assert format_p(9.3e-6) == "9E-06"
    assert format_p(None) == "NA"


def test_significance_tiers(report):
    assert [significance_tier(p) for p in (0.01, 0.05, 0.07, 0.1, 0.5, None)] == [
        "p<0.05", "p<0.10", "p<0.10", "ns", "ns", None]
    doc = json.loads(report.to_json())
    for t in doc["tests"]:
        assert t["significance"] == significance_tier(t["p_value"])


def test_tables(report):
    tables = render_tables(report)
    assert list(tables) == ["pvalues_distances", "pvalues_means", "relative_distances_DS1",
                            "summary_relative_distances"]
    rel = _rows(tables["relative_distances_DS1"])
    assert rel[0] == ["participant", "HR", "VS", "Brake"]
    assert [r[0] for r in rel[1:]] == ["P1", "P2", "P3", "P4", "avg", "stddev"]
    means = _rows(tables["pvalues_means"])
    assert means[0] == ["distraction", "HR", "Brake", "VS", "RPM"]
    assert len(_rows(tables["pvalues_distances"])[0]) == 12


def test_report_json(report):
    doc = json.loads(report.to_json())
    assert doc["version"].startswith("drivebase ")
    assert doc["config"]["band"] == "10 s"
    kinds = {t["design"] for t in doc["tests"]}
    assert kinds == {"means", "distances"}
    tests = {(t["design"], t["channel"]): t for t in doc["tests"]}
    assert tests[("means", "VS")]["test"] == "ttest"
    assert tests[("distances", "VS")]["test"] == "wilcoxon"
    assert len(doc["segment_distances"]) == 4 * 11
    assert report.to_json() == report.to_json()


def test_test_override(small_panel):
    r = analyze_panel(small_panel.panel, designs=("means",), test="wilcoxon", distractions=("DS1",),
                      means_channels=("VS",))
    assert r.cell("means", "DS1", "VS").test == "wilcoxon"
    assert r.cell("means", "DS1", "VS").result.test == "wilcoxon_signed_rank"


def test_missing_baseline_raises_upfront(small_panel):
    panel = Panel()
    for s in small_panel.panel:
        if s.session_type.value != "DS4":
            panel.add(s)
    analyze_panel(panel, designs=("means",), distractions=("DS1",))
    with pytest.raises(MissingBaseline):
        analyze_panel(panel, designs=("distances",), distractions=("DS1",))
