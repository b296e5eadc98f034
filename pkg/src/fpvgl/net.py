"""Small TCP building blocks shared by the relay and the simulator.

``BroadcastServer`` fans byte records out to any number of clients without
ever blocking the producer: each client gets a bounded queue and its own
writer thread, and a client whose queue overflows is dropped.  Clients may
also send newline-terminated text lines upstream (used for live stick
input), delivered through the ``on_line`` callback.
"""

from __future__ import annotations

import queue
import socket
import threading
from typing import Callable, Optional


class _Conn:
    def __init__(self, sock: socket.socket, depth: int,
                 on_line: Optional[Callable[[str], None]]) -> None:
        self.sock = sock
        self.queue: queue.Queue = queue.Queue(maxsize=depth)
        self.alive = True
        self._writer = threading.Thread(target=self._write_loop, daemon=True)
        self._reader = None
        if on_line is not None:
            self._on_line = on_line
            self._reader = threading.Thread(target=self._read_loop, daemon=True)

    def start(self) -> None:
        self._writer.start()
        if self._reader is not None:
            self._reader.start()

    def _write_loop(self) -> None:
        while True:
            data = self.queue.get()
            if data is None:
                break
            try:
                self.sock.sendall(data)
            except OSError:
                break
        self.close()

    def _read_loop(self) -> None:
        buf = b""
        try:
            while True:
                chunk = self.sock.recv(4096)
                if not chunk:
                    break
                buf += chunk
                while b"\n" in buf:
                    line, _, buf = buf.partition(b"\n")
                    text = line.decode("ascii", errors="replace").strip()
                    if text:
                        self._on_line(text)
        except OSError:
            pass

    def offer(self, data: bytes) -> bool:
        try:
            self.queue.put_nowait(data)
            return True
        except queue.Full:
            return False

    def close(self) -> None:
        self.alive = False
        try:
            self.sock.close()
        except OSError:
            pass


class BroadcastServer:
    def __init__(self, listen: tuple[str, int] = ("127.0.0.1", 0),
                 queue_depth: int = 256,
                 on_line: Optional[Callable[[str], None]] = None,
                 sndbuf: Optional[int] = None) -> None:
        if queue_depth < 1:
            raise ValueError("queue depth must be at least 1")
        self.queue_depth = queue_depth
        self._on_line = on_line
        self._sndbuf = sndbuf
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind(listen)
        self._conns: list[_Conn] = []
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._accept_thread = threading.Thread(target=self._accept_loop,
                                               daemon=True)

    @property
    def address(self) -> tuple[str, int]:
        return self._listener.getsockname()

    @property
    def client_count(self) -> int:
        with self._lock:
            return len(self._conns)

    def start(self) -> "BroadcastServer":
        self._listener.listen()
        self._accept_thread.start()
        return self

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                sock, _ = self._listener.accept()
            except OSError:
                return
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            if self._sndbuf is not None:
                sock.setsockopt(socket.SOL_SOCKET, socket.SO_SNDBUF,
                                self._sndbuf)
            conn = _Conn(sock, self.queue_depth, self._on_line)
            with self._lock:
                self._conns.append(conn)
            conn.start()

    def broadcast(self, data: bytes) -> None:
        """Queue data to every client; drops clients that cannot keep up."""
        with self._lock:
            conns = list(self._conns)
        for conn in conns:
            if not conn.alive or not conn.offer(data):
                conn.close()
                with self._lock:
                    if conn in self._conns:
                        self._conns.remove(conn)

    def stop(self) -> None:
        self._stop.set()
        try:
            self._listener.close()
        except OSError:
            pass
        with self._lock:
            conns = list(self._conns)
            self._conns.clear()
        for conn in conns:
            conn.close()
