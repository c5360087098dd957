from __future__ import annotations

import numpy as np
import pytest

from drivebase.model import SegmentMarkers, Series, Session
from drivebase.simgen import SessionLayout, generate_panel

SHORT = SessionLayout(before_s=30.0, during_s=30.0, after_s=30.0)


@pytest.fixture(scope="session")
def short_layout():
    return SHORT


@pytest.fixture(scope="session")
def small_panel():
    return generate_panel(4, master_seed=3, layout=SHORT, session_types=("DS1", "DS4"))


def relabel(baseline: Session, stype="DS1", markers: SegmentMarkers | None = None, values=None) -> Session:
    """Copy of a baseline session dressed up as a distraction session."""
    markers = markers or SHORT.markers()
    chans = {}
    for name, s in baseline.channels.items():
        v = s.values if values is None or name not in values else values[name]
        chans[name] = Series(name, s.times, np.array(v))
    return Session(baseline.participant_id, stype, chans, markers)
