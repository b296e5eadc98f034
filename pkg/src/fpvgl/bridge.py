"""Relay-to-console protocol translator.

Sits between the telemetry relay (binary envelopes) and the browser
console (WebSocket JSON): decoded flight state fans out as ``state``
messages, cockpit camera records become base64 ``frame`` messages, and the
console's ``stick`` messages are forwarded upstream to the simulator's
live-pilot channel.  If the relay is down the bridge keeps retrying and
tells consoles via ``status`` messages.

Console message shapes:
    {"type": "state", "t", "lat", "lon", "relAlt", "groundSpeed",
     "climb", "yawDeg"}
    {"type": "frame", "view": "front"|"bottom", "data": <base64 PNG>}
    {"type": "status", "relay": "connected"|"disconnected"}
upstream:
    {"type": "stick", "t", "roll", "pitch", "yaw", "throttle"}
"""

from __future__ import annotations

import asyncio
import base64
import json
import math
import socket
import threading
from typing import Optional

from websockets.asyncio.server import serve

from . import mavlink
from .relay import RelayClient
from .sim.dynamics import StickCommand
from .sim.server import (RECORD_BOTTOM, RECORD_FRONT, RecordScanner,
                         format_stick_line)


class MessageTranslator:
    """Folds the telemetry stream into console ``state`` messages.

    Speed and attitude arrive in separate messages from position; the
    translator caches the latest of each and emits one state message per
    position fix, mirroring how the cockpit widgets update.
    """

    def __init__(self) -> None:
        self._vfr: Optional[mavlink.VfrHud] = None
        self._attitude: Optional[mavlink.Attitude] = None

    def update(self, message: mavlink.Message) -> Optional[dict]:
        if isinstance(message, mavlink.VfrHud):
            self._vfr = message
            return None
        if isinstance(message, mavlink.Attitude):
            self._attitude = message
            return None
        if isinstance(message, mavlink.GlobalPositionInt):
            return {
                "type": "state",
                "t": message.time_boot_ms / 1000.0,
                "lat": message.lat * 1e-7,
                "lon": message.lon * 1e-7,
                "relAlt": message.relative_alt / 1000.0,
                "groundSpeed": (self._vfr.groundspeed
                                if self._vfr is not None else None),
                "climb": self._vfr.climb if self._vfr is not None else None,
                "yawDeg": (math.degrees(self._attitude.yaw) % 360.0
                           if self._attitude is not None else None),
            }
        return None


def frame_message(view: str, png: bytes) -> dict:
    return {"type": "frame", "view": view,
            "data": base64.b64encode(png).decode("ascii")}


def parse_stick_message(data: dict) -> Optional[StickCommand]:
    if data.get("type") != "stick":
        return None
    try:
        return StickCommand(roll=float(data["roll"]),
                            pitch=float(data["pitch"]),
                            yaw=float(data["yaw"]),
                            throttle=float(data["throttle"])).clamped()
    except (KeyError, TypeError, ValueError):
        return None


class Bridge:
    def __init__(self, relay_addr: tuple[str, int],
                 listen: tuple[str, int],
                 cockpit_addr: Optional[tuple[str, int]] = None,
                 retry_interval: float = 0.5) -> None:
        self._relay_addr = relay_addr
        self._listen = listen
        self._cockpit_addr = cockpit_addr
        self._retry = retry_interval
        self._stop_event = threading.Event()
        self._ready = threading.Event()
        self._loop: Optional[asyncio.AbstractEventLoop] = None
        self._queue: Optional[asyncio.Queue] = None
        self._clients: set = set()
        self._relay_connected = False
        self._cockpit_sock: Optional[socket.socket] = None
        self._thread: Optional[threading.Thread] = None
        self.ws_address: Optional[tuple[str, int]] = None

    # -- lifecycle -------------------------------------------------------

    def run_forever(self) -> None:
        asyncio.run(self._main())

    def start_background(self) -> "Bridge":
        self._thread = threading.Thread(target=self.run_forever, daemon=True)
        self._thread.start()
        if not self._ready.wait(timeout=10.0):
            raise RuntimeError("bridge did not come up")
        return self

    def stop(self) -> None:
        self._stop_event.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    async def _main(self) -> None:
        self._loop = asyncio.get_running_loop()
        self._queue = asyncio.Queue()
        threading.Thread(target=self._relay_loop, daemon=True).start()
        if self._cockpit_addr is not None:
            threading.Thread(target=self._cockpit_loop, daemon=True).start()
        async with serve(self._handler, self._listen[0],
                         self._listen[1]) as server:
            self.ws_address = server.sockets[0].getsockname()
            self._ready.set()
            broadcast = asyncio.create_task(self._broadcast_loop())
            try:
                while not self._stop_event.is_set():
                    await asyncio.sleep(0.05)
            finally:
                broadcast.cancel()

    # -- console side ----------------------------------------------------

    async def _handler(self, websocket) -> None:
        self._clients.add(websocket)
        try:
            await websocket.send(json.dumps(self._status_message()))
            async for text in websocket:
                self._handle_upstream(text)
        except Exception:
            pass
        finally:
            self._clients.discard(websocket)

    def _handle_upstream(self, text: str) -> None:
        try:
            data = json.loads(text)
        except json.JSONDecodeError:
            return
        cmd = parse_stick_message(data)
        if cmd is not None:
            self.send_stick(cmd)

    async def _broadcast_loop(self) -> None:
        while True:
            text = await self._queue.get()
            for websocket in list(self._clients):
                try:
                    await websocket.send(text)
                except Exception:
                    self._clients.discard(websocket)

    def _publish(self, message: dict) -> None:
        loop = self._loop
        queue = self._queue
        if loop is None or queue is None:
            return
        text = json.dumps(message)
        try:
            loop.call_soon_threadsafe(queue.put_nowait, text)
        except RuntimeError:
            pass  # loop already closed during shutdown

    def _status_message(self) -> dict:
        return {"type": "status",
                "relay": "connected" if self._relay_connected
                else "disconnected"}

    def _set_relay_status(self, connected: bool) -> None:
        if connected != self._relay_connected:
            self._relay_connected = connected
            self._publish(self._status_message())

    # -- relay side ------------------------------------------------------

    def _relay_loop(self) -> None:
        translator = MessageTranslator()

        def on_message(envelope, message):
            state = translator.update(message)
            if state is not None:
                self._publish(state)

        while not self._stop_event.is_set():
            try:
                client = RelayClient(self._relay_addr, on_message).start()
            except OSError:
                self._set_relay_status(False)
                self._stop_event.wait(self._retry)
                continue
            self._set_relay_status(True)
            while not client.closed and not self._stop_event.is_set():
                client.wait_closed(timeout=0.1)
            client.close()
            self._set_relay_status(False)

    # -- cockpit side ----------------------------------------------------

    def _cockpit_loop(self) -> None:
        scanner = RecordScanner()
        while not self._stop_event.is_set():
            try:
                sock = socket.create_connection(self._cockpit_addr,
                                                timeout=5.0)
            except OSError:
                self._stop_event.wait(self._retry)
                continue
            sock.settimeout(0.2)
            self._cockpit_sock = sock
            try:
                while not self._stop_event.is_set():
                    try:
                        chunk = sock.recv(65536)
                    except socket.timeout:
                        continue
                    if not chunk:
                        break
                    for kind, payload in scanner.feed(chunk):
                        if kind == RECORD_FRONT:
                            self._publish(frame_message("front", payload))
                        elif kind == RECORD_BOTTOM:
                            self._publish(frame_message("bottom", payload))
            except OSError:
                pass
            finally:
                self._cockpit_sock = None
                try:
                    sock.close()
                except OSError:
                    pass

    def send_stick(self, cmd: StickCommand) -> None:
        sock = self._cockpit_sock
        if sock is None:
            return
        try:
            sock.sendall(format_stick_line(cmd).encode("ascii"))
        except OSError:
            pass
