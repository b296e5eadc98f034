"""Synchronized per-iteration flight logging.

A session is a timestamp-named directory holding ``flight.csv`` plus
``front/`` and ``bottom/`` frame folders.  Every CSV row references exactly
one frame file per view, written in the same iteration, so telemetry and
imagery stay aligned row by row.  Telemetry fields that no message has
populated yet are stored as the literal ``nan`` (surfaced as ``None`` in
memory): the first rows of a flight legitimately precede some message
kinds, and analysis must be able to tell "absent" from zero.

The logger samples the most recent telemetry and camera frames on its own
clock rather than logging per message, which keeps the row cadence
deterministic and never blocks on the source.
"""

from __future__ import annotations

import csv
import json
import math
import threading
import time
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional

from . import mavlink
from .geodesy import Geodetic

CSV_NAME = "flight.csv"
MANIFEST_NAME = "manifest.json"
FRONT_DIR = "front"
BOTTOM_DIR = "bottom"
FRAME_NAME_FMT = "%06d_%013d.png"
ARM_PWM_THRESHOLD = 1100

# Column order of flight.csv; kind "int" columns hold scaled integers.
_COLUMNS: tuple[tuple[str, str], ...] = (
    ("wall_timestamp", "ts"),
    ("time_boot_ms", "int"),
    ("lat_1e7", "int"),
    ("lon_1e7", "int"),
    ("alt_mm", "int"),
    ("rel_alt_mm", "int"),
    ("vx_cms", "int"),
    ("vy_cms", "int"),
    ("vz_cms", "int"),
    ("hdg_cdeg", "int"),
    ("groundspeed_ms", "float"),
    ("climb_ms", "float"),
    ("roll_rad", "float"),
    ("pitch_rad", "float"),
    ("yaw_rad", "float"),
    *((f"rc{i}_us", "int") for i in range(1, 9)),
    *((f"servo{i}_us", "int") for i in range(1, 9)),
    ("front_frame", "str"),
    ("bottom_frame", "str"),
)

CSV_HEADER = tuple(name for name, _ in _COLUMNS)


class SessionError(RuntimeError):
    pass


class SessionFormatError(SessionError):
    pass


@dataclass(frozen=True)
class IterationRow:
    wall_timestamp: datetime            # naive UTC
    time_boot_ms: Optional[int]
    lat_1e7: Optional[int]
    lon_1e7: Optional[int]
    alt_mm: Optional[int]
    rel_alt_mm: Optional[int]
    vx_cms: Optional[int]
    vy_cms: Optional[int]
    vz_cms: Optional[int]
    hdg_cdeg: Optional[int]
    groundspeed_ms: Optional[float]
    climb_ms: Optional[float]
    roll_rad: Optional[float]
    pitch_rad: Optional[float]
    yaw_rad: Optional[float]
    rc_us: tuple[Optional[int], ...]      # channels 1..8
    servo_us: tuple[Optional[int], ...]   # outputs 1..8
    front_frame: str
    bottom_frame: str

    def has_gps(self) -> bool:
        return self.lat_1e7 is not None and self.lon_1e7 is not None

    def geodetic(self) -> Geodetic:
        alt = (self.alt_mm or 0) / 1000.0
        return Geodetic(self.lat_1e7 * 1e-7, self.lon_1e7 * 1e-7, alt)


@dataclass(frozen=True)
class SessionManifest:
    session_id: str
    row_count: int
    front_frame_count: int
    bottom_frame_count: int
    start_wall: Optional[str]
    end_wall: Optional[str]
    source: str


@dataclass(frozen=True)
class TelemetrySnapshot:
    global_position: Optional[mavlink.GlobalPositionInt] = None
    gps_raw: Optional[mavlink.GpsRawInt] = None
    attitude: Optional[mavlink.Attitude] = None
    vfr_hud: Optional[mavlink.VfrHud] = None
    rc_channels: Optional[mavlink.RcChannels] = None
    servo_output: Optional[mavlink.ServoOutputRaw] = None

    def is_empty(self) -> bool:
        return all(value is None for value in (
            self.global_position, self.gps_raw, self.attitude,
            self.vfr_hud, self.rc_channels, self.servo_output))


_SNAPSHOT_FIELD_BY_TYPE = {
    mavlink.GlobalPositionInt: "global_position",
    mavlink.GpsRawInt: "gps_raw",
    mavlink.Attitude: "attitude",
    mavlink.VfrHud: "vfr_hud",
    mavlink.RcChannels: "rc_channels",
    mavlink.ServoOutputRaw: "servo_output",
}


class TelemetrySnapshotCell:
    """Latest-value store fed by a decoder thread, read by the logger."""

    def __init__(self) -> None:
        self._snapshot = TelemetrySnapshot()
        self._lock = threading.Lock()

    def update(self, message: mavlink.Message) -> None:
        field = _SNAPSHOT_FIELD_BY_TYPE.get(type(message))
        if field is None:
            return
        with self._lock:
            self._snapshot = replace(self._snapshot, **{field: message})

    def snapshot(self) -> TelemetrySnapshot:
        with self._lock:
            return self._snapshot


class CameraCell:
    """Latest synchronized (front, bottom) frame pair."""

    def __init__(self) -> None:
        self._frames: Optional[tuple[bytes, bytes]] = None
        self._lock = threading.Lock()

    def set(self, front: bytes, bottom: bytes) -> None:
        with self._lock:
            self._frames = (front, bottom)

    def get(self) -> Optional[tuple[bytes, bytes]]:
        with self._lock:
            return self._frames


def _utcnow() -> datetime:
    return datetime.now(timezone.utc).replace(tzinfo=None)


def _epoch_ms(ts: datetime) -> int:
    return int(ts.replace(tzinfo=timezone.utc).timestamp() * 1000)


def _format_ts(ts: datetime) -> str:
    return f"{ts:%Y-%m-%dT%H:%M:%S}.{ts.microsecond // 1000:03d}"


def _parse_ts(text: str) -> datetime:
    base = datetime.strptime(text[:19], "%Y-%m-%dT%H:%M:%S")
    return base + timedelta(milliseconds=int(text[20:23]))


def _format_value(value, kind):
    if kind == "str":
        return value
    if value is None:
        return "nan"
    if kind == "int":
        return str(int(value))
    return repr(float(value))


def _parse_value(text, kind):
    if kind == "str":
        return text
    if text == "nan":
        return None
    if kind == "int":
        return int(text)
    value = float(text)
    return None if math.isnan(value) else value


def row_from_snapshot(snapshot: TelemetrySnapshot, front_frame: str,
                      bottom_frame: str, wall_timestamp: datetime) -> IterationRow:
    gpi = snapshot.global_position
    vfr = snapshot.vfr_hud
    att = snapshot.attitude
    rc = snapshot.rc_channels
    servo = snapshot.servo_output
    return IterationRow(
        wall_timestamp=wall_timestamp,
        time_boot_ms=gpi.time_boot_ms if gpi else None,
        lat_1e7=gpi.lat if gpi else None,
        lon_1e7=gpi.lon if gpi else None,
        alt_mm=gpi.alt if gpi else None,
        rel_alt_mm=gpi.relative_alt if gpi else None,
        vx_cms=gpi.vx if gpi else None,
        vy_cms=gpi.vy if gpi else None,
        vz_cms=gpi.vz if gpi else None,
        hdg_cdeg=gpi.hdg if gpi else None,
        groundspeed_ms=vfr.groundspeed if vfr else None,
        climb_ms=vfr.climb if vfr else None,
        roll_rad=att.roll if att else None,
        pitch_rad=att.pitch if att else None,
        yaw_rad=att.yaw if att else None,
        rc_us=tuple(rc.channels[:8]) if rc else (None,) * 8,
        servo_us=tuple(servo.servos[:8]) if servo else (None,) * 8,
        front_frame=front_frame,
        bottom_frame=bottom_frame,
    )


def _row_to_csv(row: IterationRow) -> list[str]:
    flat = {
        "wall_timestamp": _format_ts(row.wall_timestamp),
        "front_frame": row.front_frame,
        "bottom_frame": row.bottom_frame,
    }
    for name in CSV_HEADER:
        if name in flat:
            continue
        if name.startswith("rc"):
            value = row.rc_us[int(name[2]) - 1]
            kind = "int"
        elif name.startswith("servo"):
            value = row.servo_us[int(name[5]) - 1]
            kind = "int"
        else:
            value = getattr(row, name)
            kind = dict(_COLUMNS)[name]
        flat[name] = _format_value(value, kind)
    return [flat[name] for name in CSV_HEADER]


def _row_from_csv(values: list[str], index: int) -> IterationRow:
    if len(values) != len(CSV_HEADER):
        raise SessionFormatError(
            f"row {index}: expected {len(CSV_HEADER)} fields, "
            f"got {len(values)}")
    named = dict(zip(CSV_HEADER, values))
    try:
        kinds = dict(_COLUMNS)
        parsed = {name: _parse_value(named[name], kinds[name])
                  for name in CSV_HEADER
                  if kinds[name] in ("int", "float")
                  and not name.startswith(("rc", "servo"))}
        return IterationRow(
            wall_timestamp=_parse_ts(named["wall_timestamp"]),
            rc_us=tuple(_parse_value(named[f"rc{i}_us"], "int")
                        for i in range(1, 9)),
            servo_us=tuple(_parse_value(named[f"servo{i}_us"], "int")
                           for i in range(1, 9)),
            front_frame=named["front_frame"],
            bottom_frame=named["bottom_frame"],
            **parsed,
        )
    except (ValueError, KeyError) as exc:
        raise SessionFormatError(f"row {index}: {exc}") from exc


class SessionWriter:
    """One writer per session; frames and the row are committed together."""

    def __init__(self, path: Path, source_tag: str) -> None:
        self.path = path
        self.source_tag = source_tag
        self._front_dir = path / FRONT_DIR
        self._bottom_dir = path / BOTTOM_DIR
        self._csv_file = (path / CSV_NAME).open("w", newline="",
                                                encoding="utf-8")
        self._writer = csv.writer(self._csv_file)
        self._writer.writerow(CSV_HEADER)
        self._csv_file.flush()
        self._count = 0
        self._prev_ts: Optional[datetime] = None
        self._first_ts: Optional[datetime] = None
        self._closed = False

    @property
    def row_count(self) -> int:
        return self._count

    def log_iteration(self, snapshot: TelemetrySnapshot, front: bytes,
                      bottom: bytes,
                      wall_time: Optional[datetime] = None) -> int:
        if self._closed:
            raise SessionError("session already closed")
        if not front or not bottom:
            raise ValueError("both camera frames must be non-empty")
        ts = wall_time if wall_time is not None else _utcnow()
        if ts.tzinfo is not None:
            ts = ts.astimezone(timezone.utc).replace(tzinfo=None)
        ts = ts.replace(microsecond=ts.microsecond // 1000 * 1000)
        if self._prev_ts is not None and ts <= self._prev_ts:
            ts = self._prev_ts + timedelta(milliseconds=1)

        index = self._count
        name = FRAME_NAME_FMT % (index, _epoch_ms(ts))
        front_path = self._front_dir / name
        bottom_path = self._bottom_dir / name
        written = []
        try:
            for path, data in ((front_path, front), (bottom_path, bottom)):
                tmp = path.with_suffix(".tmp")
                tmp.write_bytes(data)
                tmp.rename(path)
                written.append(path)
            row = row_from_snapshot(snapshot, f"{FRONT_DIR}/{name}",
                                    f"{BOTTOM_DIR}/{name}", ts)
            self._writer.writerow(_row_to_csv(row))
            self._csv_file.flush()
        except OSError:
            for path in written:
                try:
                    path.unlink()
                except OSError:
                    pass
            raise
        self._count += 1
        self._prev_ts = ts
        if self._first_ts is None:
            self._first_ts = ts
        return index

    def close(self) -> SessionManifest:
        if self._closed:
            return self._manifest
        self._csv_file.close()
        self._manifest = SessionManifest(
            session_id=self.path.name,
            row_count=self._count,
            front_frame_count=self._count,
            bottom_frame_count=self._count,
            start_wall=_format_ts(self._first_ts) if self._first_ts else None,
            end_wall=_format_ts(self._prev_ts) if self._prev_ts else None,
            source=self.source_tag,
        )
        (self.path / MANIFEST_NAME).write_text(
            json.dumps(self._manifest.__dict__, indent=2, sort_keys=True)
            + "\n", encoding="utf-8")
        self._closed = True
        return self._manifest

    def __enter__(self) -> "SessionWriter":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def open_session(root_dir: str | Path, source_tag: str,
                 now: Optional[datetime] = None) -> SessionWriter:
    """Create ``<root>/<YYYYMMDD-HHMMSS>[-k]/`` with csv and frame dirs."""
    root = Path(root_dir)
    if not root.is_dir():
        raise SessionError(f"session root {root} is not a directory")
    stamp = (now if now is not None else _utcnow()).strftime("%Y%m%d-%H%M%S")
    for suffix_index in range(1000):
        name = stamp if suffix_index == 0 else f"{stamp}-{suffix_index}"
        path = root / name
        try:
            path.mkdir()
        except FileExistsError:
            continue
        (path / FRONT_DIR).mkdir()
        (path / BOTTOM_DIR).mkdir()
        return SessionWriter(path, source_tag)
    raise SessionError("could not find a free session directory name")


@dataclass(frozen=True)
class FlightSession:
    path: Path
    rows: tuple[IterationRow, ...]
    manifest: SessionManifest


def read_session(session_dir: str | Path) -> FlightSession:
    path = Path(session_dir)
    csv_path = path / CSV_NAME
    manifest_path = path / MANIFEST_NAME
    if not csv_path.is_file():
        raise SessionFormatError(f"{path} has no {CSV_NAME}")
    if not manifest_path.is_file():
        raise SessionFormatError(f"{path} has no {MANIFEST_NAME}")
    manifest_data = json.loads(manifest_path.read_text(encoding="utf-8"))
    manifest = SessionManifest(**manifest_data)

    rows: list[IterationRow] = []
    with csv_path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_HEADER:
            raise SessionFormatError("unexpected flight.csv header")
        for index, values in enumerate(reader):
            rows.append(_row_from_csv(values, index))

    prev = None
    for index, row in enumerate(rows):
        if prev is not None and row.wall_timestamp <= prev:
            raise SessionFormatError(
                f"row {index}: wall timestamp not strictly increasing")
        prev = row.wall_timestamp
        for ref in (row.front_frame, row.bottom_frame):
            if not (path / ref).is_file():
                raise SessionFormatError(
                    f"row {index}: missing frame file {ref}")

    if manifest.row_count != len(rows):
        raise SessionFormatError(
            f"manifest row_count {manifest.row_count} != {len(rows)} rows")
    front_files = len(list((path / FRONT_DIR).glob("*.png")))
    bottom_files = len(list((path / BOTTOM_DIR).glob("*.png")))
    if (manifest.front_frame_count != front_files
            or manifest.bottom_frame_count != bottom_files):
        raise SessionFormatError("manifest frame counts disagree with disk")
    return FlightSession(path=path, rows=tuple(rows), manifest=manifest)


def find_arm_index(rows, threshold: int = ARM_PWM_THRESHOLD) -> Optional[int]:
    """First row whose four servo outputs all read at/above the threshold."""
    for index, row in enumerate(rows):
        outputs = row.servo_us[:4]
        if all(value is not None and value >= threshold for value in outputs):
            return index
    return None


class NoGpsError(SessionError):
    pass


def session_reference_geodetic(session: FlightSession) -> Geodetic:
    """Launch-pad position estimate used as the local-frame origin.

    Averages the stationary pre-arm GPS fixes when the session has any
    (reducing single-fix noise); otherwise falls back to the first valid
    fix.
    """
    rows = session.rows
    arm_index = find_arm_index(rows)
    prefix = rows[:arm_index] if arm_index is not None else ()
    fixes = [row.geodetic() for row in prefix if row.has_gps()]
    if not fixes:
        fixes = [row.geodetic() for row in rows if row.has_gps()][:1]
    if not fixes:
        raise NoGpsError("session has no rows with valid GPS")
    count = len(fixes)
    return Geodetic(sum(f.lat for f in fixes) / count,
                    sum(f.lon for f in fixes) / count,
                    sum(f.alt for f in fixes) / count)


class LoggerRunner:
    """Wall-clock logger: absolute-deadline ticks, sampling latest values."""

    def __init__(self, session: SessionWriter,
                 snapshot_cell: TelemetrySnapshotCell,
                 camera_cell: CameraCell, rate: float = 10.0) -> None:
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.session = session
        self.snapshot_cell = snapshot_cell
        self.camera_cell = camera_cell
        self.rate = rate

    def wait_ready(self, timeout: float = 10.0) -> bool:
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if (self.camera_cell.get() is not None
                    and not self.snapshot_cell.snapshot().is_empty()):
                return True
            time.sleep(0.005)
        return False

    def run(self, duration: float,
            stop: Optional[threading.Event] = None) -> int:
        """Log for ``duration`` seconds; returns the number of rows."""
        self.wait_ready()
        interval = 1.0 / self.rate
        start = time.monotonic()
        rows = 0
        tick = 0
        while True:
            offset = tick * interval
            if offset >= duration - 1e-9:
                break
            if stop is not None and stop.is_set():
                break
            delay = start + offset - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            frames = self.camera_cell.get()
            if frames is not None:
                self.session.log_iteration(self.snapshot_cell.snapshot(),
                                           frames[0], frames[1])
                rows += 1
            tick += 1
        return rows
