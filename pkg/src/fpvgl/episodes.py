"""Imitation-learning episode export.

Turns a logged session into a step sequence with a Gym-style contract:
per-step state (geodetic position, NED velocities, attitude, distance and
bearing to the scenario's landing target, frame references) and a
normalized action vector (throttle, pitch, yaw, roll).  Every value in a
step comes from the same logger row, so state, action and imagery stay
synchronized.

Actions derive from the RC stick PWM: 1500 us is centre, +-500 us is full
deflection.  ``denormalize_pwm`` returns integer microseconds, making the
mapping exactly bijective on [1000, 2000].
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

from .flightlog import (FlightSession, IterationRow, find_arm_index,
                        session_reference_geodetic)
from .geodesy import ecef_to_enu, geodetic_to_ecef
from .sim.scenarios import Obstacle, Scenario

SCHEMA = "fpvgl-episode/1"
PWM_CENTER = 1500
PWM_SPAN = 500
PWM_SENTINELS = (0, 65535)

# AETR transmitter layout unless the caller says otherwise.
DEFAULT_CHANNEL_MAP = {"roll": 1, "pitch": 2, "throttle": 3, "yaw": 4}


class ExportError(RuntimeError):
    pass


class PwmRangeError(ExportError):
    pass


class ChannelMapError(ExportError):
    pass


class NoArmedRowsError(ExportError):
    pass


class DatasetFormatError(ExportError):
    pass


def normalize_pwm(pwm_us: int) -> float:
    """Map PWM microseconds onto [-1, 1] about the 1500 us centre."""
    if pwm_us is None or pwm_us in PWM_SENTINELS:
        raise PwmRangeError(f"PWM value {pwm_us!r} is absent or a sentinel")
    if not 800 <= pwm_us <= 2200:
        raise PwmRangeError(f"PWM value {pwm_us} outside [800, 2200]")
    value = (pwm_us - PWM_CENTER) / PWM_SPAN
    return max(-1.0, min(1.0, value))


def denormalize_pwm(value: float) -> int:
    return int(round(PWM_CENTER + PWM_SPAN * value))


@dataclass(frozen=True)
class EpisodeStep:
    t: float
    lat_deg: float
    lon_deg: float
    alt_m: float
    vx_ms: float           # north, NED
    vy_ms: float           # east
    vz_ms: float           # down
    roll_rad: float
    pitch_rad: float
    yaw_rad: float
    dist_to_target_m: float
    bearing_to_target_rad: float
    front_frame: str
    bottom_frame: str
    action: tuple[float, float, float, float]  # throttle, pitch, yaw, roll

    def __post_init__(self):
        if len(self.action) != 4 or any(not -1.0 <= a <= 1.0
                                        for a in self.action):
            raise ValueError("action components must lie in [-1, 1]")
        if self.dist_to_target_m < 0:
            raise ValueError("distance to target cannot be negative")


@dataclass(frozen=True)
class EpisodeDataset:
    scenario: Scenario
    steps: tuple[EpisodeStep, ...]
    session_dir: str
    pwm_center: int = PWM_CENTER
    pwm_span: int = PWM_SPAN


def _row_complete(row: IterationRow, channels: tuple[int, ...]) -> bool:
    if not row.has_gps():
        return False
    if row.roll_rad is None or row.pitch_rad is None or row.yaw_rad is None:
        return False
    if row.vx_cms is None:
        return False
    return all(row.rc_us[c - 1] is not None for c in channels)


def export_episode(session: FlightSession, scenario: Scenario,
                   channel_map: dict[str, int] | None = None) -> EpisodeDataset:
    """One step per armed logger row, filtered to rows with full telemetry."""
    if channel_map is None:
        channel_map = DEFAULT_CHANNEL_MAP
    missing = set(DEFAULT_CHANNEL_MAP) - set(channel_map)
    if missing:
        raise ChannelMapError(f"channel map lacks {sorted(missing)}")
    for axis, channel in channel_map.items():
        if not 1 <= channel <= 8:
            raise ChannelMapError(
                f"channel {channel} for {axis!r} outside logged range 1..8")

    arm_index = find_arm_index(session.rows)
    if arm_index is None:
        raise NoArmedRowsError("session never shows armed servo outputs")
    origin = session_reference_geodetic(session)
    target_e, target_n = scenario.landing
    channels = tuple(channel_map[axis]
                     for axis in ("throttle", "pitch", "yaw", "roll"))

    rows = [row for row in session.rows[arm_index:]
            if _row_complete(row, channels)]
    if not rows:
        raise NoArmedRowsError("no armed rows carry complete telemetry")

    t0 = rows[0].wall_timestamp
    steps = []
    for row in rows:
        enu = ecef_to_enu(geodetic_to_ecef(row.geodetic()), origin)
        de = target_e - enu.e
        dn = target_n - enu.n
        action = tuple(normalize_pwm(row.rc_us[c - 1]) for c in channels)
        steps.append(EpisodeStep(
            t=(row.wall_timestamp - t0).total_seconds(),
            lat_deg=row.lat_1e7 * 1e-7,
            lon_deg=row.lon_1e7 * 1e-7,
            alt_m=(row.alt_mm or 0) / 1000.0,
            vx_ms=row.vx_cms / 100.0,
            vy_ms=row.vy_cms / 100.0 if row.vy_cms is not None else 0.0,
            vz_ms=row.vz_cms / 100.0 if row.vz_cms is not None else 0.0,
            roll_rad=row.roll_rad,
            pitch_rad=row.pitch_rad,
            yaw_rad=row.yaw_rad,
            dist_to_target_m=math.hypot(de, dn),
            bearing_to_target_rad=math.atan2(de, dn),
            front_frame=row.front_frame,
            bottom_frame=row.bottom_frame,
            action=action,
        ))
    return EpisodeDataset(scenario=scenario, steps=tuple(steps),
                          session_dir=str(session.path))


def _scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "name": scenario.name,
        "start": list(scenario.start),
        "landing": list(scenario.landing),
        "obstacles": [[o.e, o.n, o.height] for o in scenario.obstacles],
        "target_altitude": scenario.target_altitude,
    }


def _scenario_from_dict(data: dict) -> Scenario:
    return Scenario(
        name=data["name"],
        start=tuple(data["start"]),
        landing=tuple(data["landing"]),
        obstacles=tuple(Obstacle(*item) for item in data["obstacles"]),
        target_altitude=data["target_altitude"],
    )


def write_dataset(dataset: EpisodeDataset, path: str | Path) -> None:
    if not dataset.steps:
        raise DatasetFormatError("refusing to write a dataset with no steps")
    path = Path(path)
    session_dir = Path(dataset.session_dir)
    try:
        session_rel = session_dir.resolve().relative_to(
            path.resolve().parent)
        session_ref = str(session_rel)
    except ValueError:
        session_ref = str(session_dir)
    payload = {
        "schema": SCHEMA,
        "scenario": _scenario_to_dict(dataset.scenario),
        "normalization": {"pwm_center": dataset.pwm_center,
                          "pwm_span": dataset.pwm_span},
        "session_dir": session_ref,
        "steps": [asdict(step) | {"action": list(step.action)}
                  for step in dataset.steps],
    }
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n",
                    encoding="utf-8")


def read_dataset(path: str | Path) -> EpisodeDataset:
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    if data.get("schema") != SCHEMA:
        raise DatasetFormatError(
            f"schema {data.get('schema')!r} does not match {SCHEMA!r}")
    session_dir = Path(data["session_dir"])
    if not session_dir.is_absolute():
        session_dir = path.parent / session_dir
    steps = []
    for index, raw in enumerate(data["steps"]):
        raw = dict(raw)
        raw["action"] = tuple(raw["action"])
        step = EpisodeStep(**raw)
        for ref in (step.front_frame, step.bottom_frame):
            if not (session_dir / ref).is_file():
                raise DatasetFormatError(
                    f"step {index}: missing frame file {ref}")
        steps.append(step)
    if not steps:
        raise DatasetFormatError("dataset has no steps")
    return EpisodeDataset(
        scenario=_scenario_from_dict(data["scenario"]),
        steps=tuple(steps),
        session_dir=str(session_dir),
        pwm_center=data["normalization"]["pwm_center"],
        pwm_span=data["normalization"]["pwm_span"],
    )
