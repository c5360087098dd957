"""Session files on disk, clock synchronisation and outlier cleaning.

A session is stored as a CSV (``t,<channel>,...``) plus a JSON sidecar with
the participant, session type and distraction markers.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from pathlib import Path
from typing import Mapping

import numpy as np

from .model import (
    CHANNELS,
    Panel,
    RouteFeature,
    SegmentMarkers,
    Series,
    Session,
    SessionType,
    natural_key,
)

log = logging.getLogger(__name__)

DEFAULT_RATE_HZ = 10.0

# Physically plausible bounds; anything outside is treated as a sensor glitch.
DEFAULT_LIMITS: dict[str, tuple[float, float]] = {
    "HR": (30.0, 220.0),
    "Gear": (-1.0, 6.0),
    "Brake": (0.0, 1.0),
    "Accelerator": (0.0, 1.0),
    "Clutch": (0.0, 1.0),
    "Steering": (-900.0, 900.0),
    "AccLat": (-15.0, 15.0),
    "AccLong": (-15.0, 15.0),
    "LanePos": (-10.0, 10.0),
    "VS": (0.0, 250.0),
    "RPM": (0.0, 9000.0),
}


class DataError(ValueError):
    """Invalid input data; the message names the file and, when known, the line."""

    def __init__(self, message: str, path: str | Path | None = None, line: int | None = None):
        self.path = str(path) if path is not None else None
        self.line = line
        where = ""
        if self.path:
            where = self.path + (f":{line}" if line is not None else "") + ": "
        super().__init__(where + message)


def _check_limits(limits: Mapping[str, tuple[float, float]]) -> dict[str, tuple[float, float]]:
    out = {}
    for name, bounds in limits.items():
        lo, hi = (float(v) for v in bounds)
        if not lo < hi:
            raise ValueError(f"channel limits for {name!r} need min < max (got {lo}, {hi})")
        out[name] = (lo, hi)
    return out


def load_limits(path: str | Path) -> dict[str, tuple[float, float]]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise DataError("channel limits must be a JSON object", path)
    try:
        return _check_limits({k: tuple(v) for k, v in raw.items()})
    except (TypeError, ValueError) as exc:
        raise DataError(str(exc), path) from None


def meta_path_for(data_path: str | Path) -> Path:
    return Path(data_path).with_suffix(".json")


def _parse_markers(meta: dict, path) -> SegmentMarkers | None:
    start = meta.get("distraction_start_s")
    end = meta.get("distraction_end_s")
    if start is None and end is None:
        if meta.get("features"):
            raise DataError("route features given without distraction markers", path)
        return None
    if start is None or end is None:
        raise DataError("distraction_start_s and distraction_end_s must both be set", path)
    try:
        feats = tuple(
            RouteFeature(f["label"], float(f["start_s"]), float(f["end_s"]))
            for f in meta.get("features") or []
        )
        return SegmentMarkers(float(start), float(end), feats)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"invalid markers: {exc}", path) from None


def read_meta(meta_path: str | Path) -> dict:
    try:
        with open(meta_path, encoding="utf-8") as fh:
            meta = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"malformed JSON: {exc.msg}", meta_path, exc.lineno) from None
    if not isinstance(meta, dict):
        raise DataError("meta sidecar must be a JSON object", meta_path)
    for key in ("participant_id", "session_type"):
        if key not in meta:
            raise DataError(f"meta sidecar lacks {key!r}", meta_path)
    try:
        SessionType(meta["session_type"])
    except ValueError:
        raise DataError(f"unknown session_type {meta['session_type']!r}", meta_path) from None
    return meta


def read_csv_columns(data_path: str | Path) -> tuple[list[str], np.ndarray]:
    """Header names (without ``t``) and a float matrix whose first column is ``t``."""
    rows = []
    with open(data_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError("empty CSV", data_path, 1) from None
        if not header or header[0] != "t":
            raise DataError("first column must be 't'", data_path, 1)
        if len(set(header)) != len(header):
            raise DataError("duplicate column names", data_path, 1)
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"malformed row: expected {len(header)} fields, got {len(row)}", data_path, line
                )
            try:
                vals = [float(v) for v in row]
            except ValueError:
                raise DataError(f"malformed row: non-numeric field in {row!r}", data_path, line) from None
            if not all(math.isfinite(v) for v in vals):
                raise DataError("malformed row: non-finite value", data_path, line)
            if rows and vals[0] <= rows[-1][0]:
                raise DataError(f"non-monotonic timestamps at line {line}", data_path, line)
            rows.append(vals)
    if not rows:
        raise DataError("CSV has no data rows", data_path)
    return header[1:], np.array(rows, dtype=np.float64)


def load_session(data_path: str | Path, meta_path: str | Path | None = None) -> Session:
    meta_path = meta_path_for(data_path) if meta_path is None else Path(meta_path)
    meta = read_meta(meta_path)
    names, table = read_csv_columns(data_path)
    times = table[:, 0]
    declared = meta.get("channels")
    if declared is not None:
        missing = [c for c in declared if c not in names]
        if missing:
            raise DataError(f"channels declared in meta but missing from CSV: {missing}", data_path)
    markers = _parse_markers(meta, meta_path)
    if markers is not None:
        try:
            markers.check_within(float(times[0]), float(times[-1]))
        except ValueError as exc:
            raise DataError(str(exc), meta_path) from None
    channels = {name: Series(name, times, table[:, k + 1]) for k, name in enumerate(names)}
    try:
        return Session(str(meta["participant_id"]), SessionType(meta["session_type"]), channels, markers)
    except ValueError as exc:
        raise DataError(str(exc), data_path) from None


def session_meta(session: Session) -> dict:
    m = session.markers
    return {
        "participant_id": session.participant_id,
        "session_type": session.session_type.value,
        "distraction_start_s": None if m is None else m.distraction_start,
        "distraction_end_s": None if m is None else m.distraction_end,
        "features": [] if m is None else [
            {"label": f.label, "start_s": f.start, "end_s": f.end} for f in m.features
        ],
        "channels": list(session.channels),
    }


def save_session(session: Session, data_path: str | Path, meta_path: str | Path | None = None) -> None:
    """Write CSV + sidecar; ``repr`` of each float round-trips bit-exactly."""
    data_path = Path(data_path)
    meta_path = meta_path_for(data_path) if meta_path is None else Path(meta_path)
    names = list(session.channels)
    cols = [session.times] + [session.channels[c].values for c in names]
    with open(data_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(["t"] + names) + "\n")
        for row in zip(*(c.tolist() for c in cols)):
            fh.write(",".join(repr(v) for v in row) + "\n")
    with open(meta_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(session_meta(session), fh, indent=2)
        fh.write("\n")


def resample_to_clock(series: Series, target_times) -> Series:
    """Linear interpolation onto ``target_times``; targets outside the source clamp."""
    if len(series) < 2:
        raise ValueError("cannot interpolate singleton series")
    target = np.asarray(target_times, dtype=np.float64)
    if target.ndim != 1 or target.size < 1:
        raise ValueError("target clock must be a non-empty 1-D sequence")
    if target.size > 1 and not np.all(np.diff(target) > 0):
        raise ValueError("target times must be strictly increasing")
    # np.interp clamps to the end values outside the source range.
    values = np.interp(target, series.times, series.values)
    return Series(series.channel, target, values)


def synchronize(session: Session, extra: Mapping[str, Series]) -> Session:
    """Resample extra channels (e.g. physiology) onto the session clock and attach them."""
    channels = dict(session.channels)
    for name, s in extra.items():
        r = resample_to_clock(s, session.times)
        channels[name] = Series(name, r.times, r.values)
    return Session(session.participant_id, session.session_type, channels, session.markers)


def clean_outliers(series: Series, limits: Mapping[str, tuple[float, float]]) -> tuple[Series, int]:
    """Replace out-of-bounds samples by interpolating their in-range neighbours."""
    if series.channel not in limits:
        return series, 0
    lo, hi = limits[series.channel]
    v = series.values
    bad = (v < lo) | (v > hi) | ~np.isfinite(v)
    removed = int(bad.sum())
    if removed == 0:
        return series, 0
    if removed == v.size:
        raise ValueError(f"channel entirely out of range: {series.channel!r}")
    good = ~bad
    # Interpolate on sample index so the rule holds even on an irregular clock.
    idx = np.arange(v.size, dtype=np.float64)
    fixed = v.copy()
    fixed[bad] = np.interp(idx[bad], idx[good], v[good])
    return series.with_values(fixed), removed


def clean_session(session: Session, limits: Mapping[str, tuple[float, float]] = DEFAULT_LIMITS) -> Session:
    channels = {}
    for name, s in session.channels.items():
        try:
            cleaned, removed = clean_outliers(s, limits)
        except ValueError as exc:
            raise DataError(f"{session.participant_id}/{session.session_type.value}: {exc}") from None
        if removed:
            log.info("%s/%s %s: replaced %d outliers", session.participant_id,
                     session.session_type.value, name, removed)
        channels[name] = cleaned
    return Session(session.participant_id, session.session_type, channels, session.markers)


def session_filename(participant_id: str, session_type: SessionType | str) -> str:
    return f"{participant_id}_{SessionType(session_type).value}.csv"


def load_panel(directory: str | Path, limits: Mapping[str, tuple[float, float]] | None = None) -> Panel:
    """Load every ``*.csv`` with a JSON sidecar in ``directory``.

    Sessions are discovered from the files present rather than from the
    manifest, so a panel with deleted sessions still loads.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError("panel directory not found", directory)
    panel = Panel()
    for csv_path in sorted(directory.glob("*.csv"), key=lambda p: natural_key(p.name)):
        meta = meta_path_for(csv_path)
        if not meta.exists():
            log.warning("skipping %s: no JSON sidecar", csv_path)
            continue
        session = load_session(csv_path, meta)
        if limits is not None:
            session = clean_session(session, limits)
        try:
            panel.add(session)
        except ValueError as exc:
            raise DataError(str(exc), csv_path) from None
    if len(panel) == 0:
        raise DataError("no sessions found", directory)
    return panel


def default_channel_order(names) -> list[str]:
    known = [c for c in CHANNELS if c in names]
    return known + sorted(c for c in names if c not in CHANNELS)
