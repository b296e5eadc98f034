"""Companion-to-ground telemetry relay with explicit latency accounting.

The airborne side runs ``RelayServer``: it pulls raw frames from a source,
stamps each one at ingestion with the sender's monotonic clock and fans the
resulting envelopes out to every connected TCP client.  Ingestion never
waits on any client; a client whose queue backs up past the configured
depth is disconnected instead of stalling the rest.  The ground side runs
``RelayClient``, which records per-envelope arrival times so the transport
delay between the two processes can be quantified.

Envelope wire format, little endian: magic 0xA5, u64 source timestamp in
microseconds, u16 frame length, then one MAVLink frame verbatim.
"""

from __future__ import annotations

import math
import os
import queue
import socket
import struct
import threading
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from . import mavlink
from .net import BroadcastServer

ENVELOPE_MAGIC = 0xA5
_MAGIC_BYTE = bytes([ENVELOPE_MAGIC])
_HEADER = struct.Struct("<BQH")
_MAX_FRAME_LEN = 263  # v1 frame overhead + 255 payload bytes

DEFAULT_QUEUE_DEPTH = 1024
QUEUE_DEPTH_ENV = "FPVGL_RELAY_QUEUE_DEPTH"


def monotonic_us() -> int:
    return time.monotonic_ns() // 1000


@dataclass(frozen=True)
class Envelope:
    source_timestamp_us: int
    frame: bytes


def pack_envelope(env: Envelope) -> bytes:
    return _HEADER.pack(ENVELOPE_MAGIC, env.source_timestamp_us,
                        len(env.frame)) + env.frame


class EnvelopeScanner:
    """Incremental envelope extractor; resynchronizes on the magic byte.

    An envelope is accepted only if its embedded frame decodes, so corrupt
    bytes between valid envelopes are skipped without losing either
    neighbour.
    """

    def __init__(self) -> None:
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[tuple[Envelope, mavlink.Message]]:
        self._buf += data
        buf = self._buf
        out: list[tuple[Envelope, mavlink.Message]] = []
        pos = 0
        n = len(buf)
        while True:
            start = buf.find(_MAGIC_BYTE, pos)
            if start < 0:
                pos = n
                break
            if start + _HEADER.size > n:
                pos = start
                break
            _, ts, frame_len = _HEADER.unpack_from(buf, start)
            if not 8 <= frame_len <= _MAX_FRAME_LEN:
                pos = start + 1
                continue
            end = start + _HEADER.size + frame_len
            if end > n:
                pos = start
                break
            frame = bytes(buf[start + _HEADER.size:end])
            try:
                message = mavlink.decode_frame(frame)
            except mavlink.FrameDecodeError:
                pos = start + 1
                continue
            out.append((Envelope(ts, frame), message))
            pos = end
        del buf[:pos]
        return out


@dataclass(frozen=True)
class LatencyReport:
    count: int
    min_s: float
    p50_s: float
    p95_s: float
    max_s: float


class NoSamplesError(RuntimeError):
    pass


def _nearest_rank(sorted_values, fraction):
    index = max(0, math.ceil(len(sorted_values) * fraction) - 1)
    return sorted_values[min(index, len(sorted_values) - 1)]


def latency_report_from_samples(samples_us: list[int]) -> LatencyReport:
    if not samples_us:
        raise NoSamplesError("no envelopes received yet")
    ordered = sorted(samples_us)
    return LatencyReport(
        count=len(ordered),
        min_s=ordered[0] / 1e6,
        p50_s=_nearest_rank(ordered, 0.50) / 1e6,
        p95_s=_nearest_rank(ordered, 0.95) / 1e6,
        max_s=ordered[-1] / 1e6,
    )


class FrameQueue:
    """Thread-safe frame hand-off usable as both sink and source.

    The producer calls the instance (or ``put``); the consumer iterates.
    ``close`` ends iteration once queued frames drain.
    """

    _SENTINEL = object()

    def __init__(self, maxsize: int = 0) -> None:
        self._q: queue.Queue = queue.Queue(maxsize)

    def put(self, frame: bytes) -> None:
        self._q.put(frame)

    __call__ = put

    def close(self) -> None:
        self._q.put(self._SENTINEL)

    def __iter__(self):
        while True:
            item = self._q.get()
            if item is self._SENTINEL:
                return
            yield item


class RelayServer:
    """Serve envelopes built from a frame source to any number of clients."""

    def __init__(self, frame_source: Iterable[bytes],
                 listen: tuple[str, int] = ("127.0.0.1", 0),
                 queue_depth: Optional[int] = None,
                 sndbuf: Optional[int] = None) -> None:
        if queue_depth is None:
            queue_depth = int(os.environ.get(QUEUE_DEPTH_ENV,
                                             DEFAULT_QUEUE_DEPTH))
        self._source = frame_source
        self._server = BroadcastServer(listen, queue_depth=queue_depth,
                                       sndbuf=sndbuf)
        self._stop = threading.Event()
        self._ingest_thread = threading.Thread(target=self._ingest_loop,
                                               daemon=True)
        self.frames_ingested = 0

    @property
    def queue_depth(self) -> int:
        return self._server.queue_depth

    @property
    def address(self) -> tuple[str, int]:
        return self._server.address

    @property
    def client_count(self) -> int:
        return self._server.client_count

    def start(self) -> "RelayServer":
        self._server.start()
        self._ingest_thread.start()
        return self

    def _ingest_loop(self) -> None:
        for frame in self._source:
            if self._stop.is_set():
                return
            self._server.broadcast(
                pack_envelope(Envelope(monotonic_us(), frame)))
            self.frames_ingested += 1

    def stop(self) -> None:
        self._stop.set()
        self._server.stop()


OnMessage = Callable[[Envelope, mavlink.Message], None]


class RelayClient:
    """Subscribe to a relay server and decode its envelope stream."""

    def __init__(self, address: tuple[str, int],
                 on_message: Optional[OnMessage] = None) -> None:
        self._address = address
        self._on_message = on_message
        self._sock: Optional[socket.socket] = None
        self._samples_us: list[int] = []
        self._lock = threading.Lock()
        self._closed = threading.Event()
        self.error: Optional[Exception] = None
        self.received = 0
        self._thread = threading.Thread(target=self._reader, daemon=True)

    def start(self) -> "RelayClient":
        sock = socket.create_connection(self._address, timeout=10.0)
        sock.settimeout(None)
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        self._sock = sock
        self._thread.start()
        return self

    def _reader(self) -> None:
        scanner = EnvelopeScanner()
        sock = self._sock
        assert sock is not None
        try:
            while True:
                data = sock.recv(65536)
                if not data:
                    break
                arrival = monotonic_us()
                for envelope, message in scanner.feed(data):
                    with self._lock:
                        self._samples_us.append(
                            arrival - envelope.source_timestamp_us)
                        self.received += 1
                    if self._on_message is not None:
                        self._on_message(envelope, message)
        except OSError as exc:
            self.error = exc
        finally:
            try:
                sock.close()
            except OSError:
                pass
            self._closed.set()

    @property
    def closed(self) -> bool:
        return self._closed.is_set()

    def wait_closed(self, timeout: Optional[float] = None) -> bool:
        return self._closed.wait(timeout)

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            try:
                self._sock.close()
            except OSError:
                pass
        if self._thread.is_alive():
            self._thread.join(timeout=5.0)
        self._closed.set()

    def latency_report(self) -> LatencyReport:
        with self._lock:
            samples = list(self._samples_us)
        return latency_report_from_samples(samples)
