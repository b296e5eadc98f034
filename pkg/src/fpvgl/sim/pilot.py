"""Deterministic pilots for the four task scenarios, plus live stick input.

The scripted pilot follows a time-parameterized reference trajectory built
from the scenario's waypoints (climb, cruise legs, circles, a figure-8
lemniscate) and converts tracking error into stick deflections:

    velocity command = v_ref + tau * a_ref + Kp * (p_ref - p)

The tau * a_ref term inverts the craft's first-order velocity response, so
the reference is tracked essentially exactly along smooth sections; Kp
cleans up transients at phase boundaries.  Straight legs use a trapezoidal
speed profile and speed fractions are chosen so the combined command stays
inside the stick range, both of which keep boundary transients small.

The climb reference holds slightly above the task's target altitude: a
pure first-order approach from below would never quite reach the threshold
the maneuver-extraction rule looks for.

Durations are fixed by the schedule, which makes the nominal trail length
an exact, inspectable number.
"""

from __future__ import annotations

import math
import threading
from bisect import bisect_right
from dataclasses import dataclass

from .dynamics import CENTER_STICKS, SimConfig, SimState, StickCommand
from .scenarios import Scenario

HOVER_EPS = 0.02        # m above target altitude the climb reference holds at
CLIMB_FRACTION = 0.7    # of max climb rate
DESCENT_FRACTION = 0.4
CRUISE_FRACTION = 0.7   # of max horizontal speed
RAMP_S = 1.5            # velocity ramp-in/out time of straight legs
SETTLE_S = 3.0
HOVER_HOLD_S = 11.0     # covers the 10 s hover window plus crossing slack
GROUND_HOLD_S = 1.5
CIRCLE_RADIUS = 2.0
FIG8_HALF_SPAN = 5.0    # east extent of each lobe tip from the centre
FIG8_WIDTH_GAIN = 5.0   # peak lateral excursion is half of this

Vec3 = tuple[float, float, float]
ZERO3: Vec3 = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class _Hold:
    point: Vec3
    duration: float

    def ref(self, tau: float) -> tuple[Vec3, Vec3, Vec3]:
        return self.point, ZERO3, ZERO3


class _Line:
    """Straight leg with a trapezoidal speed profile."""

    def __init__(self, p0: Vec3, p1: Vec3, speed: float,
                 ramp: float = RAMP_S) -> None:
        self.p0 = p0
        self.p1 = p1
        length = math.dist(p0, p1)
        self._length = length
        self._speed = min(speed, length / ramp) if length > 0 else speed
        self._ramp = ramp
        self.duration = length / self._speed + ramp if length > 0 else ramp

    def _profile(self, tau: float) -> tuple[float, float, float]:
        v = self._speed
        ramp = self._ramp
        end = self.duration
        accel = v / ramp
        if tau <= 0.0:
            return 0.0, 0.0, accel
        if tau >= end:
            return self._length, 0.0, 0.0
        if tau < ramp:
            return 0.5 * accel * tau * tau, accel * tau, accel
        if tau <= end - ramp:
            return 0.5 * v * ramp + v * (tau - ramp), v, 0.0
        remain = end - tau
        return (self._length - 0.5 * accel * remain * remain,
                accel * remain, -accel)

    def ref(self, tau: float) -> tuple[Vec3, Vec3, Vec3]:
        if self._length == 0.0:
            return self.p0, ZERO3, ZERO3
        dist, speed, accel = self._profile(tau)
        direction = tuple((b - a) / self._length
                          for a, b in zip(self.p0, self.p1))
        pos = tuple(a + d * dist for a, d in zip(self.p0, direction))
        vel = tuple(d * speed for d in direction)
        acc = tuple(d * accel for d in direction)
        return pos, vel, acc


@dataclass(frozen=True)
class _Arc:
    center: tuple[float, float]
    radius: float
    altitude: float
    angle0: float
    sweep: float       # radians, positive is counter-clockwise
    duration: float

    def ref(self, tau: float) -> tuple[Vec3, Vec3, Vec3]:
        s = min(1.0, max(0.0, tau / self.duration))
        angle = self.angle0 + self.sweep * s
        rate = self.sweep / self.duration
        cos_a = math.cos(angle)
        sin_a = math.sin(angle)
        pos = (self.center[0] + self.radius * cos_a,
               self.center[1] + self.radius * sin_a,
               self.altitude)
        vel = (-self.radius * rate * sin_a,
               self.radius * rate * cos_a,
               0.0)
        acc = (-self.radius * rate * rate * cos_a,
               -self.radius * rate * rate * sin_a,
               0.0)
        return pos, vel, acc


@dataclass(frozen=True)
class _Lemniscate:
    """Figure-8 of Gerono, (A sin s, G sin s cos s) about a centre point.

    Peak lateral excursion is G/2; the curve self-intersects at the centre.
    """

    center: tuple[float, float]
    half_span: float   # A
    width_gain: float  # G
    altitude: float
    s0: float
    sweep: float
    duration: float

    def ref(self, tau: float) -> tuple[Vec3, Vec3, Vec3]:
        frac = min(1.0, max(0.0, tau / self.duration))
        s = self.s0 + self.sweep * frac
        rate = self.sweep / self.duration
        pos = (self.center[0] + self.half_span * math.sin(s),
               self.center[1] + 0.5 * self.width_gain * math.sin(2.0 * s),
               self.altitude)
        vel = (self.half_span * math.cos(s) * rate,
               self.width_gain * math.cos(2.0 * s) * rate,
               0.0)
        acc = (-self.half_span * math.sin(s) * rate * rate,
               -2.0 * self.width_gain * math.sin(2.0 * s) * rate * rate,
               0.0)
        return pos, vel, acc

    def peak_speed_factor(self) -> float:
        return math.hypot(self.half_span, self.width_gain)


class ScriptedPilot:
    """Waypoint-following controller for one scenario."""

    def __init__(self, scenario: Scenario, config: SimConfig) -> None:
        self.scenario = scenario
        self.config = config
        self.kp = 1.0 / config.response_tau
        self._phases = _build_schedule(scenario, config)
        self._starts = []
        t = 0.0
        for phase in self._phases:
            self._starts.append(t)
            t += phase.duration
        self.duration = t

    def reference(self, script_t: float) -> tuple[Vec3, Vec3, Vec3]:
        if script_t <= 0.0:
            return self._phases[0].ref(0.0)
        if script_t >= self.duration:
            last = self._phases[-1]
            return last.ref(last.duration)
        index = bisect_right(self._starts, script_t) - 1
        return self._phases[index].ref(script_t - self._starts[index])

    def command(self, state: SimState, script_t: float) -> StickCommand:
        (re, rn, ru), (ve, vn, vu), (ae, an, au) = self.reference(script_t)
        tau = self.config.response_tau
        ve_cmd = ve + tau * ae + self.kp * (re - state.e)
        vn_cmd = vn + tau * an + self.kp * (rn - state.n)
        vu_cmd = vu + tau * au + self.kp * (ru - state.u)
        sin_yaw = math.sin(state.yaw)
        cos_yaw = math.cos(state.yaw)
        forward = ve_cmd * sin_yaw + vn_cmd * cos_yaw
        right = ve_cmd * cos_yaw - vn_cmd * sin_yaw
        return StickCommand(
            roll=right / self.config.max_horizontal_speed,
            pitch=forward / self.config.max_horizontal_speed,
            yaw=0.0,
            throttle=vu_cmd / self.config.max_climb_rate,
        ).clamped()


def _build_schedule(scenario: Scenario, config: SimConfig):
    climb_v = CLIMB_FRACTION * config.max_climb_rate
    descent_v = DESCENT_FRACTION * config.max_climb_rate
    cruise_v = CRUISE_FRACTION * config.max_horizontal_speed
    alt = scenario.target_altitude + HOVER_EPS
    start = scenario.start
    landing = scenario.landing
    task = scenario.task_number

    def at(point, altitude):
        return (point[0], point[1], altitude)

    def line(a, b, altitude, speed):
        return _Line(at(a, altitude), at(b, altitude), speed)

    phases = [
        _Line(at(start, 0.0), at(start, alt), climb_v),
        _Hold(at(start, alt), SETTLE_S),
    ]

    if task == 1:
        phases.append(_Hold(at(start, alt), HOVER_HOLD_S))
        land_at = start
    elif task == 2:
        phases.append(line(start, landing, alt, cruise_v))
        phases.append(_Hold(at(landing, alt), SETTLE_S))
        land_at = landing
    elif task == 3:
        first = scenario.obstacles[0]
        entry = (first.e - CIRCLE_RADIUS, first.n)
        circle_time = 2.0 * math.pi * CIRCLE_RADIUS / cruise_v
        phases.append(line(start, entry, alt, cruise_v))
        phases.append(_Arc(center=(first.e, first.n), radius=CIRCLE_RADIUS,
                           altitude=alt, angle0=math.pi,
                           sweep=2.0 * math.pi, duration=circle_time))
        phases.append(line(entry, landing, alt, cruise_v))
        phases.append(_Hold(at(landing, alt), SETTLE_S))
        land_at = landing
    else:
        first, second = scenario.obstacles
        center = ((first.e + second.e) / 2.0, (first.n + second.n) / 2.0)
        entry = (center[0] - FIG8_HALF_SPAN, center[1])
        # Pace the curve parameter so its fastest point moves at cruise speed.
        peak = math.hypot(FIG8_HALF_SPAN, FIG8_WIDTH_GAIN)
        fig8 = _Lemniscate(center=center, half_span=FIG8_HALF_SPAN,
                           width_gain=FIG8_WIDTH_GAIN, altitude=alt,
                           s0=-math.pi / 2.0, sweep=2.0 * math.pi,
                           duration=2.0 * math.pi * peak / cruise_v)
        phases.append(line(start, entry, alt, cruise_v))
        phases.append(fig8)
        phases.append(line(entry, start, alt, cruise_v))
        phases.append(_Hold(at(start, alt), SETTLE_S))
        land_at = start

    phases.append(_Line(at(land_at, alt), at(land_at, 0.0), descent_v))
    phases.append(_Hold(at(land_at, 0.0), GROUND_HOLD_S))
    return phases


class CommandCell:
    """Latest-value hand-off for live stick input; reads never block."""

    def __init__(self) -> None:
        self._cmd = CENTER_STICKS
        self._lock = threading.Lock()

    def set(self, cmd: StickCommand) -> None:
        with self._lock:
            self._cmd = cmd.clamped()

    def get(self) -> StickCommand:
        with self._lock:
            return self._cmd


class LivePilot:
    """Samples the most recent human command; silence means hold position."""

    duration = None

    def __init__(self, cell: CommandCell) -> None:
        self.cell = cell

    def command(self, state: SimState, script_t: float) -> StickCommand:
        return self.cell.get()
