"""Network endpoints the simulator exposes.

Frame feed: raw MAVLink frame bytes over TCP, which is exactly what the
relay accepts as a source.  Cockpit channel: typed records downstream
(camera PNGs) and newline-delimited stick commands upstream, so a remote
console can both watch and fly.

Cockpit record layout: one type byte ('F' front frame, 'B' bottom frame),
little-endian u32 payload length, payload.  Upstream lines look like
``stick <roll> <pitch> <yaw> <throttle>`` with normalized floats.
"""

from __future__ import annotations

import struct
from typing import Optional

from ..net import BroadcastServer
from .dynamics import StickCommand
from .pilot import CommandCell

RECORD_FRONT = ord("F")
RECORD_BOTTOM = ord("B")
_LEN = struct.Struct("<I")


def pack_record(kind: int, payload: bytes) -> bytes:
    return bytes([kind]) + _LEN.pack(len(payload)) + payload


class RecordScanner:
    """Incremental cockpit-record splitter for the client side."""

    def __init__(self) -> None:
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[tuple[int, bytes]]:
        self._buf += data
        out = []
        while len(self._buf) >= 5:
            kind = self._buf[0]
            length = _LEN.unpack_from(self._buf, 1)[0]
            if len(self._buf) < 5 + length:
                break
            out.append((kind, bytes(self._buf[5:5 + length])))
            del self._buf[:5 + length]
        return out


def parse_stick_line(line: str) -> Optional[StickCommand]:
    parts = line.split()
    if len(parts) != 5 or parts[0] != "stick":
        return None
    try:
        roll, pitch, yaw, throttle = (float(part) for part in parts[1:])
    except ValueError:
        return None
    return StickCommand(roll=roll, pitch=pitch, yaw=yaw,
                        throttle=throttle).clamped()


def format_stick_line(cmd: StickCommand) -> str:
    return f"stick {cmd.roll:.4f} {cmd.pitch:.4f} {cmd.yaw:.4f} {cmd.throttle:.4f}\n"


class FrameFeedServer:
    """Serves the simulator's raw telemetry frames to relay instances."""

    def __init__(self, listen: tuple[str, int]) -> None:
        self._server = BroadcastServer(listen)

    @property
    def address(self) -> tuple[str, int]:
        return self._server.address

    def start(self) -> "FrameFeedServer":
        self._server.start()
        return self

    def send(self, frame: bytes) -> None:
        self._server.broadcast(frame)

    def stop(self) -> None:
        self._server.stop()


class CockpitServer:
    """Camera feed out, stick input in; stick lines land in a CommandCell."""

    def __init__(self, listen: tuple[str, int],
                 command_cell: Optional[CommandCell] = None) -> None:
        self.command_cell = command_cell if command_cell is not None \
            else CommandCell()
        self._server = BroadcastServer(listen, on_line=self._on_line)

    def _on_line(self, line: str) -> None:
        cmd = parse_stick_line(line)
        if cmd is not None:
            self.command_cell.set(cmd)

    @property
    def address(self) -> tuple[str, int]:
        return self._server.address

    def start(self) -> "CockpitServer":
        self._server.start()
        return self

    def send_frames(self, front: bytes, bottom: bytes) -> None:
        self._server.broadcast(pack_record(RECORD_FRONT, front))
        self._server.broadcast(pack_record(RECORD_BOTTOM, bottom))

    def stop(self) -> None:
        self._server.stop()
