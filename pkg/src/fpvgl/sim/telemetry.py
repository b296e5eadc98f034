"""Telemetry and camera-frame synthesis for the simulated craft.

Each simulator tick produces the same message set a real flight stack
streams: global/raw GPS (with optional seeded horizontal noise applied in
the local frame before the geodetic conversion), attitude, HUD speeds, RC
stick PWM and servo output PWM, plus a 1 Hz heartbeat.  Attitude roll and
pitch are a small-angle proxy proportional to the lateral and forward
commands; the analysis pipeline only logs them.
"""

from __future__ import annotations

import io
import math
import random
import struct

from PIL import Image

from .. import mavlink
from ..geodesy import Enu, enu_to_geodetic
from .dynamics import CENTER_STICKS, SimConfig, SimState, StickCommand

PWM_CENTER = 1500
PWM_SPAN = 500
PWM_DISARMED = 1000
PWM_ARM_THRESHOLD = 1100
MAX_TILT_RAD = 0.2

# AETR channel assignment: roll, pitch, throttle, yaw on channels 1..4.
RC_CHANNEL_ORDER = ("roll", "pitch", "throttle", "yaw")


def stick_to_pwm(value: float) -> int:
    return int(round(PWM_CENTER + PWM_SPAN * max(-1.0, min(1.0, value))))


def rc_channel_values(cmd: StickCommand) -> tuple[int, int, int, int]:
    return (stick_to_pwm(cmd.roll), stick_to_pwm(cmd.pitch),
            stick_to_pwm(cmd.throttle), stick_to_pwm(cmd.yaw))


def servo_values(cmd: StickCommand, armed: bool) -> tuple[int, int, int, int]:
    if not armed:
        return (PWM_DISARMED,) * 4
    value = int(round(PWM_CENTER + 400 * max(-1.0, min(1.0, cmd.throttle))))
    value = max(PWM_ARM_THRESHOLD, min(1900, value))
    return (value,) * 4


class TelemetrySynth:
    """Stateful message synthesizer; owns the GPS noise stream."""

    def __init__(self, config: SimConfig) -> None:
        self._config = config
        self._rng = random.Random(config.seed)

    def telemetry_tick(self, state: SimState,
                       cmd: StickCommand = CENTER_STICKS,
                       tick_index: int = 0) -> list[mavlink.Message]:
        config = self._config
        sigma = config.gps_noise_sigma
        east = state.e
        north = state.n
        if sigma > 0.0:
            east += self._rng.gauss(0.0, sigma)
            north += self._rng.gauss(0.0, sigma)
        geo = enu_to_geodetic(Enu(east, north, state.u), config.origin)
        lat = int(round(geo.lat * 1e7))
        lon = int(round(geo.lon * 1e7))
        alt_mm = int(round(geo.alt * 1000))
        rel_alt_mm = int(round((state.u - state.arm_altitude) * 1000)) \
            if state.armed else 0

        time_boot_ms = int(round(state.t * 1000))
        time_usec = int(round(state.t * 1e6))
        heading_deg = math.degrees(state.yaw) % 360.0
        hdg_cdeg = int(round(heading_deg * 100)) % 36000
        ground_speed = state.ground_speed

        messages: list[mavlink.Message] = [
            mavlink.GlobalPositionInt(
                time_boot_ms=time_boot_ms, lat=lat, lon=lon, alt=alt_mm,
                relative_alt=rel_alt_mm,
                vx=int(round(state.vn * 100)),
                vy=int(round(state.ve * 100)),
                vz=int(round(-state.vu * 100)),
                hdg=hdg_cdeg),
            mavlink.GpsRawInt(
                time_usec=time_usec, fix_type=3, lat=lat, lon=lon,
                alt=alt_mm, eph=100, epv=150,
                vel=int(round(ground_speed * 100)), cog=hdg_cdeg,
                satellites_visible=12),
            mavlink.Attitude(
                time_boot_ms=time_boot_ms,
                roll=cmd.roll * MAX_TILT_RAD,
                pitch=-cmd.pitch * MAX_TILT_RAD,
                yaw=state.yaw,
                rollspeed=0.0, pitchspeed=0.0,
                yawspeed=cmd.yaw * config.max_yaw_rate),
            mavlink.VfrHud(
                airspeed=ground_speed, groundspeed=ground_speed,
                heading=int(heading_deg), throttle=int(round(50 + 50 * cmd.throttle)),
                alt=geo.alt, climb=state.vu),
            mavlink.RcChannels(
                time_boot_ms=time_boot_ms, chancount=4,
                channels=rc_channel_values(cmd) + (0,) * 14, rssi=200),
            mavlink.ServoOutputRaw(
                time_usec=time_usec, port=0,
                servos=servo_values(cmd, state.armed) + (0,) * 4),
        ]
        if tick_index % config.tick_rate == 0:
            messages.append(mavlink.Heartbeat(
                type=2, autopilot=12,
                base_mode=(128 if state.armed else 0) | 1,
                custom_mode=0,
                system_status=4 if state.armed else 3,
                mavlink_version=3))
        return messages


_FRONT_BG = (108, 168, 222)
_BOTTOM_BG = (96, 116, 88)
FRAME_SIZE = (64, 48)


def render_camera_frame(view: str, tick_index: int, time_ms: int) -> bytes:
    """Tiny synthetic PNG with the tick index embedded in the first pixels.

    The first eight pixels of the top row carry tick index and timestamp as
    little-endian u32 pairs in the red channel, so logged frames can be
    matched back to the telemetry row that referenced them.
    """
    background = _FRONT_BG if view == "front" else _BOTTOM_BG
    image = Image.new("RGB", FRAME_SIZE, background)
    stamp = struct.pack("<II", tick_index & 0xFFFFFFFF, time_ms & 0xFFFFFFFF)
    pixels = image.load()
    for i, byte in enumerate(stamp):
        pixels[i, 0] = (byte, background[1], background[2])
    buf = io.BytesIO()
    image.save(buf, format="PNG")
    return buf.getvalue()


def read_frame_stamp(png_bytes: bytes) -> tuple[int, int]:
    """Inverse of the pixel stamp in render_camera_frame."""
    image = Image.open(io.BytesIO(png_bytes)).convert("RGB")
    pixels = image.load()
    raw = bytes(pixels[i, 0][0] for i in range(8))
    tick_index, time_ms = struct.unpack("<II", raw)
    return tick_index, time_ms
