"""Position-mode quadcopter dynamics.

The craft responds to stick deflection as a velocity command: pitch is
forward speed, roll is rightward speed, throttle is climb rate, each scaled
by its configured cap, and neutral sticks command zero velocity (position
hold).  Actual velocity relaxes toward the command as a first-order system
with time constant ``response_tau``, using the exact exponential update so
behaviour is step-size independent.  Everything is deterministic given the
config, the seed and the command sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..geodesy import Geodetic

# Default local-frame origin: an open outdoor test field footprint.
DEFAULT_ORIGIN = Geodetic(lat=43.0008000, lon=-78.7890000, alt=180.0)


@dataclass(frozen=True)
class SimConfig:
    max_horizontal_speed: float = 1.20   # m/s, suggested cruise cap
    max_climb_rate: float = 1.0          # m/s
    max_yaw_rate: float = 1.0            # rad/s
    response_tau: float = 0.5            # s
    tick_rate: int = 50                  # Hz
    gps_noise_sigma: float = 0.0         # m, horizontal, per axis
    origin: Geodetic = DEFAULT_ORIGIN
    seed: int = 0
    camera_rate: float = 10.0            # Hz, synthetic frame cadence

    def __post_init__(self):
        if self.max_horizontal_speed <= 0 or self.max_climb_rate <= 0:
            raise ValueError("speed caps must be positive")
        if self.max_yaw_rate <= 0 or self.response_tau <= 0:
            raise ValueError("rates must be positive")
        if self.tick_rate < 10:
            raise ValueError("tick rate must be at least 10 Hz")
        if self.gps_noise_sigma < 0:
            raise ValueError("gps noise sigma must be non-negative")
        if self.camera_rate <= 0:
            raise ValueError("camera rate must be positive")

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate


@dataclass(frozen=True)
class StickCommand:
    """Normalized stick deflections, each in [-1, 1]."""

    roll: float = 0.0      # + right
    pitch: float = 0.0     # + forward
    yaw: float = 0.0       # + clockwise (viewed from above)
    throttle: float = 0.0  # + climb

    def clamped(self) -> "StickCommand":
        def clip(v):
            return -1.0 if v < -1.0 else (1.0 if v > 1.0 else v)
        return StickCommand(clip(self.roll), clip(self.pitch),
                            clip(self.yaw), clip(self.throttle))


CENTER_STICKS = StickCommand()


@dataclass(frozen=True)
class SimState:
    t: float = 0.0
    e: float = 0.0       # m east of origin
    n: float = 0.0       # m north of origin
    u: float = 0.0       # m above origin
    ve: float = 0.0      # m/s
    vn: float = 0.0
    vu: float = 0.0
    yaw: float = 0.0     # rad, heading from north, clockwise positive
    armed: bool = False
    arm_altitude: float = 0.0

    @property
    def position(self) -> tuple[float, float, float]:
        return (self.e, self.n, self.u)

    @property
    def velocity(self) -> tuple[float, float, float]:
        return (self.ve, self.vn, self.vu)

    @property
    def ground_speed(self) -> float:
        return math.hypot(self.ve, self.vn)


def wrap_angle(angle: float) -> float:
    """Normalize to (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def arm(state: SimState) -> SimState:
    return replace(state, armed=True, arm_altitude=state.u)


def disarm(state: SimState) -> SimState:
    return replace(state, armed=False, ve=0.0, vn=0.0, vu=0.0,
                   u=max(0.0, state.u))


def step(state: SimState, cmd: StickCommand, config: SimConfig,
         dt: float) -> SimState:
    """Advance one fixed step; ``dt`` must not exceed two nominal ticks."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if dt > 2.0 / config.tick_rate + 1e-12:
        raise ValueError("dt exceeds twice the nominal tick interval")
    if not state.armed:
        return replace(state, t=state.t + dt)

    cmd = cmd.clamped()
    forward = cmd.pitch * config.max_horizontal_speed
    right = cmd.roll * config.max_horizontal_speed
    horizontal = math.hypot(forward, right)
    if horizontal > config.max_horizontal_speed:
        scale = config.max_horizontal_speed / horizontal
        forward *= scale
        right *= scale
    sin_yaw = math.sin(state.yaw)
    cos_yaw = math.cos(state.yaw)
    ve_cmd = forward * sin_yaw + right * cos_yaw
    vn_cmd = forward * cos_yaw - right * sin_yaw
    vu_cmd = cmd.throttle * config.max_climb_rate

    alpha = 1.0 - math.exp(-dt / config.response_tau)
    ve = state.ve + (ve_cmd - state.ve) * alpha
    vn = state.vn + (vn_cmd - state.vn) * alpha
    vu = state.vu + (vu_cmd - state.vu) * alpha

    e = state.e + 0.5 * (state.ve + ve) * dt
    n = state.n + 0.5 * (state.vn + vn) * dt
    u = state.u + 0.5 * (state.vu + vu) * dt
    if u < 0.0:  # ground contact
        u = 0.0
        vu = max(0.0, vu)

    yaw = wrap_angle(state.yaw + cmd.yaw * config.max_yaw_rate * dt)
    return SimState(t=state.t + dt, e=e, n=n, u=u, ve=ve, vn=vn, vu=vu,
                    yaw=yaw, armed=True, arm_altitude=state.arm_altitude)
