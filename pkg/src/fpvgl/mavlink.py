"""MAVLink v1 codec for the telemetry subset a small ground station needs.

Seven message types are supported: HEARTBEAT, GPS_RAW_INT, ATTITUDE,
GLOBAL_POSITION_INT, SERVO_OUTPUT_RAW, RC_CHANNELS and VFR_HUD.  Together
they carry GPS position, attitude angles, speeds, RC stick PWM and servo
output PWM.  Message ids, wire field order, payload sizes and per-message
CRC seeds follow the public common dialect; frames produced here are
byte-identical to what a stock v1 encoder emits for the same field values.

The encoder is pure.  ``Parser`` owns mutable stream state and may be moved
between threads but not shared for concurrent mutation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

MAGIC = 0xFE
_MAGIC_BYTE = bytes([MAGIC])

# Frame layout: magic, payload_len, seq, sys_id, comp_id, msg_id, payload,
# checksum (low byte first).  The checksum covers payload_len..payload plus
# the per-message CRC-extra byte.
_HEADER_LEN = 6
_OVERHEAD = _HEADER_LEN + 2


def _build_crc_table() -> tuple[int, ...]:
    table = []
    for byte in range(256):
        tmp = (byte ^ (byte << 4)) & 0xFF
        table.append(((tmp << 8) ^ (tmp << 3) ^ (tmp >> 4)) & 0xFFFF)
    return tuple(table)


_CRC_TABLE = _build_crc_table()


def x25_crc(data: bytes, crc: int = 0xFFFF) -> int:
    """X.25 / MCRF4XX CRC-16 accumulator used by MAVLink framing."""
    table = _CRC_TABLE
    for byte in data:
        crc = (crc >> 8) ^ table[(crc ^ byte) & 0xFF]
    return crc


def checksum(data: bytes, crc_extra: int) -> int:
    """Frame checksum: X.25 CRC over ``data`` folded with the CRC-extra byte."""
    crc = x25_crc(data)
    return (crc >> 8) ^ _CRC_TABLE[(crc ^ crc_extra) & 0xFF]


@dataclass(frozen=True)
class Heartbeat:
    type: int = 0
    autopilot: int = 0
    base_mode: int = 0
    custom_mode: int = 0
    system_status: int = 0
    mavlink_version: int = 3

    MSG_ID = 0
    CRC_EXTRA = 50
    WIRE_FMT = "<IBBBBB"

    def _wire_values(self):
        return (self.custom_mode, self.type, self.autopilot, self.base_mode,
                self.system_status, self.mavlink_version)

    @classmethod
    def _from_wire(cls, v):
        return cls(type=v[1], autopilot=v[2], base_mode=v[3], custom_mode=v[0],
                   system_status=v[4], mavlink_version=v[5])


@dataclass(frozen=True)
class GpsRawInt:
    time_usec: int = 0
    fix_type: int = 0
    lat: int = 0            # degrees * 1e7
    lon: int = 0            # degrees * 1e7
    alt: int = 0            # millimetres
    eph: int = 65535
    epv: int = 65535
    vel: int = 65535        # cm/s
    cog: int = 65535        # centidegrees
    satellites_visible: int = 255

    MSG_ID = 24
    CRC_EXTRA = 24
    WIRE_FMT = "<QiiiHHHHBB"

    def _wire_values(self):
        return (self.time_usec, self.lat, self.lon, self.alt, self.eph,
                self.epv, self.vel, self.cog, self.fix_type,
                self.satellites_visible)

    @classmethod
    def _from_wire(cls, v):
        return cls(time_usec=v[0], fix_type=v[8], lat=v[1], lon=v[2], alt=v[3],
                   eph=v[4], epv=v[5], vel=v[6], cog=v[7],
                   satellites_visible=v[9])


@dataclass(frozen=True)
class Attitude:
    time_boot_ms: int = 0
    roll: float = 0.0       # radians
    pitch: float = 0.0
    yaw: float = 0.0
    rollspeed: float = 0.0  # rad/s
    pitchspeed: float = 0.0
    yawspeed: float = 0.0

    MSG_ID = 30
    CRC_EXTRA = 39
    WIRE_FMT = "<Iffffff"

    def _wire_values(self):
        return (self.time_boot_ms, self.roll, self.pitch, self.yaw,
                self.rollspeed, self.pitchspeed, self.yawspeed)

    @classmethod
    def _from_wire(cls, v):
        return cls(*v)


@dataclass(frozen=True)
class GlobalPositionInt:
    time_boot_ms: int = 0
    lat: int = 0            # degrees * 1e7
    lon: int = 0            # degrees * 1e7
    alt: int = 0            # millimetres above MSL
    relative_alt: int = 0   # millimetres above arming point
    vx: int = 0             # cm/s, north
    vy: int = 0             # cm/s, east
    vz: int = 0             # cm/s, down
    hdg: int = 65535        # centidegrees

    MSG_ID = 33
    CRC_EXTRA = 104
    WIRE_FMT = "<IiiiihhhH"

    def _wire_values(self):
        return (self.time_boot_ms, self.lat, self.lon, self.alt,
                self.relative_alt, self.vx, self.vy, self.vz, self.hdg)

    @classmethod
    def _from_wire(cls, v):
        return cls(*v)


@dataclass(frozen=True)
class ServoOutputRaw:
    time_usec: int = 0
    port: int = 0
    servos: tuple[int, ...] = (0,) * 8   # PWM microseconds, servo1..servo8

    MSG_ID = 36
    CRC_EXTRA = 222
    WIRE_FMT = "<I8HB"

    def _wire_values(self):
        return (self.time_usec, *self.servos, self.port)

    @classmethod
    def _from_wire(cls, v):
        return cls(time_usec=v[0], port=v[9], servos=tuple(v[1:9]))


@dataclass(frozen=True)
class RcChannels:
    time_boot_ms: int = 0
    chancount: int = 0
    channels: tuple[int, ...] = (0,) * 18  # PWM microseconds, chan1..chan18
    rssi: int = 255

    MSG_ID = 65
    CRC_EXTRA = 118
    WIRE_FMT = "<I18HBB"

    def _wire_values(self):
        return (self.time_boot_ms, *self.channels, self.chancount, self.rssi)

    @classmethod
    def _from_wire(cls, v):
        return cls(time_boot_ms=v[0], chancount=v[19],
                   channels=tuple(v[1:19]), rssi=v[20])


@dataclass(frozen=True)
class VfrHud:
    airspeed: float = 0.0    # m/s
    groundspeed: float = 0.0
    heading: int = 0         # degrees
    throttle: int = 0        # percent
    alt: float = 0.0         # metres
    climb: float = 0.0       # m/s

    MSG_ID = 74
    CRC_EXTRA = 20
    WIRE_FMT = "<ffffhH"

    def _wire_values(self):
        return (self.airspeed, self.groundspeed, self.alt, self.climb,
                self.heading, self.throttle)

    @classmethod
    def _from_wire(cls, v):
        return cls(airspeed=v[0], groundspeed=v[1], heading=v[4],
                   throttle=v[5], alt=v[2], climb=v[3])


Message = (Heartbeat | GpsRawInt | Attitude | GlobalPositionInt
           | ServoOutputRaw | RcChannels | VfrHud)

MESSAGE_TYPES = (Heartbeat, GpsRawInt, Attitude, GlobalPositionInt,
                 ServoOutputRaw, RcChannels, VfrHud)


class _Spec:
    __slots__ = ("cls", "msg_id", "crc_extra", "packer", "payload_len")

    def __init__(self, cls):
        self.cls = cls
        self.msg_id = cls.MSG_ID
        self.crc_extra = cls.CRC_EXTRA
        self.packer = struct.Struct(cls.WIRE_FMT)
        self.payload_len = self.packer.size


_SPEC_BY_ID = {cls.MSG_ID: _Spec(cls) for cls in MESSAGE_TYPES}
_SPEC_BY_CLS = {spec.cls: spec for spec in _SPEC_BY_ID.values()}

PAYLOAD_LEN_BY_ID = {i: s.payload_len for i, s in _SPEC_BY_ID.items()}
CRC_EXTRA_BY_ID = {i: s.crc_extra for i, s in _SPEC_BY_ID.items()}


class UnsupportedMessage(ValueError):
    pass


def encode(message: Message, seq: int, sys_id: int = 1, comp_id: int = 1) -> bytes:
    """Serialize ``message`` into a single well-formed v1 frame."""
    spec = _SPEC_BY_CLS.get(type(message))
    if spec is None:
        raise UnsupportedMessage(f"cannot encode {type(message).__name__}")
    payload = spec.packer.pack(*message._wire_values())
    header = bytes((spec.payload_len, seq & 0xFF, sys_id & 0xFF,
                    comp_id & 0xFF, spec.msg_id))
    crc = checksum(header + payload, spec.crc_extra)
    return _MAGIC_BYTE + header + payload + struct.pack("<H", crc)


BAD_CHECKSUM = "bad_checksum"
UNKNOWN_MSG_ID = "unknown_msg_id"


@dataclass(frozen=True)
class FrameError:
    kind: str       # BAD_CHECKSUM or UNKNOWN_MSG_ID
    msg_id: int


class FrameDecodeError(ValueError):
    pass


def decode_frame(frame: bytes) -> Message:
    """Decode one complete frame; raises FrameDecodeError on anything off."""
    if len(frame) < _OVERHEAD or frame[0] != MAGIC:
        raise FrameDecodeError("not a frame")
    spec = _SPEC_BY_ID.get(frame[5])
    if spec is None:
        raise FrameDecodeError(f"unknown msg id {frame[5]}")
    if frame[1] != spec.payload_len or len(frame) != _OVERHEAD + spec.payload_len:
        raise FrameDecodeError("length mismatch")
    crc = checksum(frame[1:6 + spec.payload_len], spec.crc_extra)
    if crc != frame[-2] | (frame[-1] << 8):
        raise FrameDecodeError("checksum mismatch")
    return spec.cls._from_wire(spec.packer.unpack(frame[6:6 + spec.payload_len]))


class Parser:
    """Incremental frame extractor with resynchronization.

    ``feed`` may be called with arbitrary chunks of a byte stream, including
    empty slices, mid-frame splits and garbage.  Every complete valid frame
    is emitted exactly once, in stream order, regardless of how the stream
    was chunked.  After a corrupt or unknown candidate the scan resumes one
    byte past that candidate's magic byte, so an intact frame is never
    swallowed by a bogus header in front of it (garbage may yield extra
    error events, never lost messages).
    """

    def __init__(self) -> None:
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[Message | FrameError]:
        self._buf += data
        buf = self._buf
        out: list[Message | FrameError] = []
        pos = 0
        n = len(buf)
        while True:
            start = buf.find(_MAGIC_BYTE, pos)
            if start < 0:
                pos = n
                break
            if start + _HEADER_LEN > n:
                pos = start
                break
            spec = _SPEC_BY_ID.get(buf[start + 5])
            if spec is None:
                out.append(FrameError(UNKNOWN_MSG_ID, buf[start + 5]))
                pos = start + 1
                continue
            if buf[start + 1] != spec.payload_len:
                out.append(FrameError(BAD_CHECKSUM, spec.msg_id))
                pos = start + 1
                continue
            end = start + _OVERHEAD + spec.payload_len
            if end > n:
                pos = start
                break
            body = bytes(buf[start + 1:start + _HEADER_LEN + spec.payload_len])
            crc = checksum(body, spec.crc_extra)
            if crc != buf[end - 2] | (buf[end - 1] << 8):
                out.append(FrameError(BAD_CHECKSUM, spec.msg_id))
                pos = start + 1
                continue
            out.append(spec.cls._from_wire(
                spec.packer.unpack(body[5:5 + spec.payload_len])))
            pos = end
        del buf[:pos]
        return out

    def pending(self) -> int:
        """Bytes currently buffered waiting for frame completion."""
        return len(self._buf)


class FrameSplitter:
    """Like ``Parser`` but yields the raw bytes of each valid frame.

    Used where frames are forwarded verbatim (relay ingestion) instead of
    being interpreted.
    """

    def __init__(self) -> None:
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[bytes]:
        self._buf += data
        buf = self._buf
        out: list[bytes] = []
        pos = 0
        n = len(buf)
        while True:
            start = buf.find(_MAGIC_BYTE, pos)
            if start < 0:
                pos = n
                break
            if start + _HEADER_LEN > n:
                pos = start
                break
            spec = _SPEC_BY_ID.get(buf[start + 5])
            if spec is None or buf[start + 1] != spec.payload_len:
                pos = start + 1
                continue
            end = start + _OVERHEAD + spec.payload_len
            if end > n:
                pos = start
                break
            frame = bytes(buf[start:end])
            crc = checksum(frame[1:_HEADER_LEN + spec.payload_len], spec.crc_extra)
            if crc != frame[-2] | (frame[-1] << 8):
                pos = start + 1
                continue
            out.append(frame)
            pos = end
        del buf[:pos]
        return out
