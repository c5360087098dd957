"""Deterministic synthetic driving panels with injectable distraction effects.

Every random draw comes from a Philox stream keyed by ``(seed, stream id)``,
and the same draws are made whatever the effect.  A zero effect therefore
reproduces the baseline sample-for-sample when both sessions share a seed.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy.signal import lfilter

from .io import save_session, session_filename
from .metrics import DEFAULT_WINDOW
from .model import (
    BASELINE,
    RouteFeature,
    SegmentMarkers,
    Series,
    Session,
    SessionType,
    Panel,
)

# Bump when any change alters generated samples for a fixed seed.
GENERATOR_VERSION = "1"

_STREAMS = {
    "session": 0,
    "VS": 1,
    "HR_slow": 2,
    "HR_fast": 3,
    "Brake": 4,
    "Steering": 5,
    "LanePos": 6,
    "Accelerator": 7,
    "RPM": 8,
    "route": 9,
}

_GEAR_UP = np.array([15.0, 30.0, 50.0, 70.0])  # km/h thresholds for gears 2..5
_GEAR_HYST = 3.0
_RPM_PER_KMH = np.array([110.0, 65.0, 45.0, 35.0, 28.0])
_IDLE_RPM = 800.0
_STEERING_RATIO = 15.0
_WHEELBASE_M = 2.7


@dataclass(frozen=True)
class DriverProfile:
    participant_id: str
    target_speed: float  # km/h
    speed_reversion_rate: float  # 1/s
    speed_noise: float  # km/h, stationary standard deviation
    hr_baseline: float  # bpm
    hr_noise: float  # bpm
    steering_noise: float  # deg
    brake_event_rate: float  # events/min
    rng_seed: int

    def __post_init__(self):
        if not self.target_speed > 0:
            raise ValueError("target_speed must be positive")
        for name in ("speed_reversion_rate", "speed_noise", "hr_noise", "steering_noise",
                     "brake_event_rate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class DistractionEffect:
    speed_shift: float = 0.0  # fraction of target speed, -0.2 = 20% slower
    hr_shift: float = 0.0  # bpm
    steering_noise_multiplier: float = 1.0
    onset_ramp: float = 2.0  # s

    def __post_init__(self):
        if self.steering_noise_multiplier < 0:
            raise ValueError("steering_noise_multiplier must be non-negative")
        if self.onset_ramp < 0:
            raise ValueError("onset_ramp must be non-negative")
        if self.speed_shift <= -1:
            raise ValueError("speed_shift must exceed -1")

    @property
    def is_zero(self) -> bool:
        return self.speed_shift == 0 and self.hr_shift == 0 and self.steering_noise_multiplier == 1


NO_EFFECT = DistractionEffect()


@dataclass(frozen=True)
class SessionLayout:
    """Segment durations (s) and sampling rate shared by every generated session."""

    before_s: float = 120.0
    during_s: float = 120.0
    after_s: float = 120.0
    rate_hz: float = 10.0
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        for name in ("before_s", "during_s", "after_s"):
            n = round(getattr(self, name) * self.rate_hz)
            if n < self.window:
                raise ValueError(
                    f"invalid durations: {name} gives {n} samples, fewer than window {self.window}"
                )

    @property
    def n_samples(self) -> int:
        return int(round((self.before_s + self.during_s + self.after_s) * self.rate_hz))

    @property
    def dt(self) -> float:
        return 1.0 / self.rate_hz

    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.rate_hz

    def markers(self) -> SegmentMarkers:
        start = self.before_s
        end = self.before_s + self.during_s
        d = self.during_s
        return SegmentMarkers(
            start,
            end,
            (
                RouteFeature("curve", start + 0.2 * d, start + 0.45 * d),
                RouteFeature("straight", start + 0.55 * d, start + 0.85 * d),
            ),
        )


def _rng(seed: int, stream: str) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), _STREAMS[stream]])
    return np.random.Generator(np.random.Philox(ss))


def ou_path(mean: np.ndarray, sd: np.ndarray, rate: float, dt: float, eps: np.ndarray) -> np.ndarray:
    """Exact discretisation of a mean-reverting process with time-varying mean and sd.

    ``eps`` holds standard-normal draws, one per sample; ``eps[0]`` sets the
    start, drawn from the stationary distribution.
    """
    a = float(np.exp(-rate * dt))
    drive = (1.0 - a) * mean[:-1] + sd[:-1] * np.sqrt(1.0 - a * a) * eps[1:]
    x0 = mean[0] + sd[0] * eps[0]
    rest, _ = lfilter([1.0], [1.0, -a], drive, zi=[a * x0])
    return np.concatenate([[x0], rest])


def _ramp(t: np.ndarray, markers: SegmentMarkers | None, onset: float) -> np.ndarray:
    if markers is None:
        return np.zeros_like(t)
    inside = (t >= markers.distraction_start) & (t < markers.distraction_end)
    if onset > 0:
        level = np.clip((t - markers.distraction_start) / onset, 0.0, 1.0)
    else:
        level = np.ones_like(t)
    return np.where(inside, level, 0.0)


def route_template(layout: SessionLayout, route_seed: int) -> np.ndarray:
    """Steering-wheel angle (deg) the route demands at each sample.

    One pronounced curve sits inside the annotated curve feature; two gentle
    bends fall in the before and after segments.
    """
    rng = _rng(route_seed, "route")
    t = layout.times()
    steer = np.zeros_like(t)
    curve = layout.markers().feature("curve")
    bends = [
        (curve.start, curve.end, rng.uniform(25.0, 35.0) * rng.choice([-1.0, 1.0])),
        (layout.before_s * rng.uniform(0.3, 0.5), None, rng.uniform(5.0, 10.0) * rng.choice([-1.0, 1.0])),
        (layout.before_s + layout.during_s + layout.after_s * rng.uniform(0.3, 0.5), None,
         rng.uniform(5.0, 10.0) * rng.choice([-1.0, 1.0])),
    ]
    for start, end, amp in bends:
        end = start + 15.0 if end is None else end
        inside = (t >= start) & (t < end)
        steer[inside] += amp * 0.5 * (1.0 - np.cos(2.0 * np.pi * (t[inside] - start) / (end - start)))
    return steer


def _gears(vs: np.ndarray) -> np.ndarray:
    gear = np.empty(vs.size)
    g = 1 + int(np.searchsorted(_GEAR_UP, vs[0], side="right"))
    for k, v in enumerate(vs):
        while g < 5 and v >= _GEAR_UP[g - 1] + _GEAR_HYST:
            g += 1
        while g > 1 and v < _GEAR_UP[g - 2] - _GEAR_HYST:
            g -= 1
        gear[k] = g
    return gear


def _pulses(t: np.ndarray, starts: np.ndarray, durations: np.ndarray, heights: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    for s, d, h in zip(starts, durations, heights):
        inside = (t >= s) & (t < s + d)
        out[inside] = np.maximum(out[inside], h * np.sin(np.pi * (t[inside] - s) / d))
    return out


def generate_session(
    profile: DriverProfile,
    session_type: SessionType | str,
    effect: DistractionEffect = NO_EFFECT,
    seed: int = 0,
    layout: SessionLayout | None = None,
) -> Session:
    layout = layout or SessionLayout()
    stype = SessionType(session_type)
    markers = None if stype is BASELINE else layout.markers()
    if markers is None:
        effect = NO_EFFECT
    t = layout.times()
    n, dt = t.size, layout.dt
    ramp = _ramp(t, markers, effect.onset_ramp)
    ones = np.ones(n)

    srng = _rng(seed, "session")
    speed_offset = srng.normal(0.0, 0.02 * profile.target_speed)
    hr_offset = srng.normal(0.0, 2.0)

    target = (profile.target_speed + speed_offset) * (1.0 + effect.speed_shift * ramp)
    vs = ou_path(target, profile.speed_noise * ones, profile.speed_reversion_rate, dt,
                 _rng(seed, "VS").standard_normal(n))
    vs = np.maximum(vs, 0.0)

    hr_slow = ou_path(np.zeros(n), 1.5 * profile.hr_noise * ones, 1.0 / 60.0, dt,
                      _rng(seed, "HR_slow").standard_normal(n))
    hr_fast = profile.hr_noise * _rng(seed, "HR_fast").standard_normal(n)
    hr = profile.hr_baseline + hr_offset + hr_slow + hr_fast + effect.hr_shift * ramp

    noise_scale = 1.0 + (effect.steering_noise_multiplier - 1.0) * ramp
    template = route_template(layout, profile.rng_seed)
    steering = template + ou_path(np.zeros(n), profile.steering_noise * noise_scale, 0.5, dt,
                                  _rng(seed, "Steering").standard_normal(n))
    lane = ou_path(np.zeros(n), 0.2 * noise_scale, 0.2, dt, _rng(seed, "LanePos").standard_normal(n))

    v_ms = vs / 3.6
    kernel = np.ones(10) / 10.0
    smooth_v = np.convolve(np.pad(v_ms, (5, 4), mode="edge"), kernel, mode="valid")
    acc_long = np.gradient(smooth_v, dt)
    curvature = np.tan(np.radians(steering / _STEERING_RATIO)) / _WHEELBASE_M
    acc_lat = v_ms**2 * curvature

    brng = _rng(seed, "Brake")
    hits = brng.random(n) < profile.brake_event_rate * dt / 60.0
    dur = brng.uniform(1.0, 3.0, n)
    height = brng.uniform(0.2, 0.6, n)
    brake = _pulses(t, t[hits], dur[hits], height[hits])

    arng = _rng(seed, "Accelerator")
    accel = 0.3 + 0.02 * (target - vs) + 0.02 * arng.standard_normal(n)
    accel = np.where(brake > 0.05, 0.0, np.clip(accel, 0.0, 1.0))

    gear = _gears(vs)
    changes = t[1:][np.diff(gear) != 0]
    clutch = _pulses(t, changes - 0.5, np.ones(changes.size), np.ones(changes.size))
    rpm = _IDLE_RPM + vs * _RPM_PER_KMH[gear.astype(int) - 1]
    rpm = rpm + 20.0 * _rng(seed, "RPM").standard_normal(n)

    values = {
        "HR": hr,
        "Gear": gear,
        "Brake": brake,
        "Accelerator": accel,
        "Clutch": clutch,
        "Steering": steering,
        "AccLat": acc_lat,
        "AccLong": acc_long,
        "LanePos": lane,
        "VS": vs,
        "RPM": rpm,
    }
    channels = {name: Series(name, t, v) for name, v in values.items()}
    return Session(profile.participant_id, stype, channels, markers)


def draw_profile(participant_id: str, rng: np.random.Generator) -> DriverProfile:
    return DriverProfile(
        participant_id=participant_id,
        target_speed=float(rng.uniform(50.0, 80.0)),
        speed_reversion_rate=float(rng.uniform(0.2, 0.5)),
        speed_noise=float(rng.uniform(2.0, 4.0)),
        hr_baseline=float(rng.uniform(60.0, 85.0)),
        hr_noise=float(rng.uniform(1.0, 3.0)),
        steering_noise=float(rng.uniform(2.0, 6.0)),
        brake_event_rate=float(rng.uniform(0.5, 2.0)),
        rng_seed=int(rng.integers(0, 2**63 - 1)),
    )


def session_seed(profile: DriverProfile, session_type: SessionType) -> int:
    order = list(SessionType).index(SessionType(session_type))
    ss = np.random.SeedSequence([profile.rng_seed, 1000 + order])
    return int(ss.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))


@dataclass
class SyntheticPanel:
    panel: Panel
    profiles: list[DriverProfile]
    seeds: dict[tuple[str, str], int]
    effects: dict[str, DistractionEffect]
    master_seed: int
    layout: SessionLayout = field(default_factory=SessionLayout)

    def manifest(self) -> dict:
        return {
            "generator_version": GENERATOR_VERSION,
            "master_seed": self.master_seed,
            "n_participants": len(self.profiles),
            "layout": asdict(self.layout),
            "effects": {k: asdict(v) for k, v in sorted(self.effects.items())},
            "profiles": [asdict(p) for p in self.profiles],
            "sessions": [
                {
                    "participant_id": s.participant_id,
                    "session_type": s.session_type.value,
                    "file": session_filename(s.participant_id, s.session_type),
                    "seed": self.seeds[(s.participant_id, s.session_type.value)],
                }
                for s in self.panel
            ],
        }


def generate_panel(
    n_participants: int,
    effect_map: Mapping[SessionType | str, DistractionEffect] | None = None,
    master_seed: int = 0,
    layout: SessionLayout | None = None,
    session_types=tuple(SessionType),
) -> SyntheticPanel:
    """Draw ``n_participants`` driver profiles and generate their sessions.

    ``effect_map`` gives the effect per distraction type; absent types get no
    effect.  ``session_types`` can restrict generation to a subset (all five
    by default).
    """
    if n_participants < 2:
        raise ValueError("a panel needs at least 2 participants")
    layout = layout or SessionLayout()
    effects = {SessionType(k).value: v for k, v in (effect_map or {}).items()}
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(master_seed), 7])))
    profiles = [draw_profile(f"P{k + 1}", rng) for k in range(n_participants)]
    panel = Panel()
    seeds = {}
    for profile in profiles:
        for stype in map(SessionType, session_types):
            seed = session_seed(profile, stype)
            seeds[(profile.participant_id, stype.value)] = seed
            effect = effects.get(stype.value, NO_EFFECT)
            panel.add(generate_session(profile, stype, effect, seed, layout))
    return SyntheticPanel(panel, profiles, seeds, effects, int(master_seed), layout)


def write_panel(synthetic: SyntheticPanel, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for session in synthetic.panel:
        save_session(session, out_dir / session_filename(session.participant_id, session.session_type))
    manifest = out_dir / "manifest.json"
    with open(manifest, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(synthetic.manifest(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
