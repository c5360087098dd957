"""Core domain types: sensor series, driving sessions and their segment markers."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

UNIFORM_STEP_RTOL = 1e-9


class SessionType(str, Enum):
    DS1 = "DS1"  # passenger in the back seat, recalling information
    DS2 = "DS2"  # phone hands-free, recalling information
    DS3 = "DS3"  # phone hand-held, recalling information
    DS4 = "DS4"  # no distraction: the baseline drive
    DS5 = "DS5"  # passenger in the back seat, maths & spelling

    @property
    def is_baseline(self) -> bool:
        return self is SessionType.DS4


BASELINE = SessionType.DS4
DISTRACTIONS = (SessionType.DS1, SessionType.DS2, SessionType.DS3, SessionType.DS5)

# Simulator channels plus heart rate, in the column order of the distance p-value table.
CHANNELS = (
    "HR",
    "Gear",
    "Brake",
    "Accelerator",
    "Clutch",
    "Steering",
    "AccLat",
    "AccLong",
    "LanePos",
    "VS",
    "RPM",
)

CHANNEL_UNITS = {
    "HR": "bpm",
    "Gear": "gear",
    "Brake": "fraction",
    "Accelerator": "fraction",
    "Clutch": "fraction",
    "Steering": "deg",
    "AccLat": "m/s^2",
    "AccLong": "m/s^2",
    "LanePos": "m",
    "VS": "km/h",
    "RPM": "rpm",
}

FEATURE_LABELS = ("straight", "curve")


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Series:
    """One sensor channel sampled on a strictly increasing clock (seconds)."""

    channel: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = _frozen_array(self.times, "times")
        values = _frozen_array(self.values, "values")
        if times.size < 1:
            raise ValueError(f"series {self.channel!r} is empty")
        if times.size != values.size:
            raise ValueError(
                f"series {self.channel!r}: {times.size} timestamps but {values.size} values"
            )
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError(f"series {self.channel!r}: timestamps not strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def unit(self) -> str | None:
        return CHANNEL_UNITS.get(self.channel)

    @property
    def step(self) -> float:
        if len(self) < 2:
            return float("nan")
        return float((self.times[-1] - self.times[0]) / (len(self) - 1))

    def is_uniform(self, rtol: float = UNIFORM_STEP_RTOL) -> bool:
        if len(self) < 3:
            return True
        dt = np.diff(self.times)
        return bool(np.all(np.abs(dt - self.step) <= rtol * self.step))

    def with_values(self, values) -> Series:
        return Series(self.channel, self.times, values)

    def slice(self, mask_or_slice) -> Series:
        return Series(self.channel, self.times[mask_or_slice], self.values[mask_or_slice])


@dataclass(frozen=True)
class RouteFeature:
    label: str
    start: float
    end: float

    def __post_init__(self):
        if self.label not in FEATURE_LABELS:
            raise ValueError(f"unknown route feature label {self.label!r}")
        if not self.start < self.end:
            raise ValueError(f"route feature {self.label!r} has start >= end")


@dataclass(frozen=True)
class SegmentMarkers:
    """Distraction start/end plus optional route features inside the distraction."""

    distraction_start: float
    distraction_end: float
    features: tuple[RouteFeature, ...] = ()

    def __post_init__(self):
        if not self.distraction_start < self.distraction_end:
            raise ValueError("distraction_start must precede distraction_end")
        feats = tuple(sorted(self.features, key=lambda f: (f.start, f.end)))
        for f in feats:
            if f.start < self.distraction_start or f.end > self.distraction_end:
                raise ValueError(f"route feature {f.label!r} lies outside the distraction")
        for a, b in zip(feats, feats[1:]):
            if b.start < a.end:
                raise ValueError("route features overlap")
        object.__setattr__(self, "features", feats)

    def check_within(self, start: float, end: float) -> None:
        if not (start < self.distraction_start and self.distraction_end < end):
            raise ValueError(
                f"markers outside session: distraction [{self.distraction_start}, "
                f"{self.distraction_end}] not strictly inside [{start}, {end}]"
            )

    def feature(self, label: str) -> RouteFeature:
        for f in self.features:
            if f.label == label:
                return f
        raise KeyError(f"feature not annotated: {label!r}")


@dataclass(frozen=True, eq=False)
class Session:
    """A set of channels recorded on one common clock by one participant."""

    participant_id: str
    session_type: SessionType
    channels: Mapping[str, Series]
    markers: SegmentMarkers | None = None

    def __post_init__(self):
        stype = SessionType(self.session_type)
        object.__setattr__(self, "session_type", stype)
        if not self.channels:
            raise ValueError(f"session {self.participant_id}/{stype.value} has no channels")
        object.__setattr__(self, "channels", dict(self.channels))
        clock = None
        for name, s in self.channels.items():
            if s.channel != name:
                raise ValueError(f"channel key {name!r} holds series named {s.channel!r}")
            if clock is None:
                clock = s.times
            elif s.times.shape != clock.shape or not np.array_equal(s.times, clock):
                raise ValueError(f"channel {name!r} is not on the session clock")
        if not self.channels[next(iter(self.channels))].is_uniform():
            raise ValueError("session clock is not uniformly sampled")
        if stype.is_baseline:
            if self.markers is not None:
                raise ValueError("baseline session DS4 must not carry distraction markers")
        else:
            if self.markers is None:
                raise ValueError(f"distraction session {stype.value} requires markers")
            self.markers.check_within(float(clock[0]), float(clock[-1]))

    @property
    def times(self) -> np.ndarray:
        return next(iter(self.channels.values())).times

    @property
    def duration(self) -> float:
        t = self.times
        return float(t[-1] - t[0])

    def __getitem__(self, channel: str) -> Series:
        try:
            return self.channels[channel]
        except KeyError:
            raise KeyError(
                f"channel {channel!r} missing from session "
                f"{self.participant_id}/{self.session_type.value}"
            ) from None

    def __contains__(self, channel: str) -> bool:
        return channel in self.channels


@dataclass(frozen=True)
class SegmentedSeries:
    before: Series
    during: Series
    after: Series

    def __iter__(self):
        return iter((self.before, self.during, self.after))

    def concatenated(self) -> np.ndarray:
        return np.concatenate([self.before.values, self.during.values, self.after.values])


def segment_labels(times: Sequence[float], markers: SegmentMarkers) -> np.ndarray:
    """Label each sample 0 (before), 1 (during) or 2 (after).

    Intervals are half-open: ``during`` is ``start <= t < end``.
    """
    t = np.asarray(times, dtype=np.float64)
    labels = np.full(t.shape, 2, dtype=np.int8)
    labels[t < markers.distraction_end] = 1
    labels[t < markers.distraction_start] = 0
    return labels


@dataclass
class Panel:
    """Sessions of several participants keyed by participant then session type."""

    sessions: dict[str, dict[SessionType, Session]] = field(default_factory=dict)

    def add(self, session: Session) -> None:
        by_type = self.sessions.setdefault(session.participant_id, {})
        if session.session_type in by_type:
            raise ValueError(
                f"duplicate session {session.participant_id}/{session.session_type.value}"
            )
        by_type[session.session_type] = session

    @property
    def participants(self) -> list[str]:
        return sorted(self.sessions, key=natural_key)

    def get(self, participant: str, session_type: SessionType | str) -> Session | None:
        return self.sessions.get(participant, {}).get(SessionType(session_type))

    def __iter__(self):
        for pid in self.participants:
            by_type = self.sessions[pid]
            for stype in SessionType:
                if stype in by_type:
                    yield by_type[stype]

    def __len__(self) -> int:
        return sum(len(v) for v in self.sessions.values())


def natural_key(text: str):
    """Sort key that orders P2 before P10."""
    return [int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", text)]
