"""
Telemetry relay: airborne server, ground client, measured latency
=================================================================

Runs the socket pipeline the ground station uses: a frame source standing
in for the flight controller, the relay server wrapping each frame in a
timestamped envelope, and a subscribing client that accounts for the
transport delay of every envelope it receives.
"""

import time

from fpvgl import mavlink as mav
from fpvgl.relay import FrameQueue, RelayClient, RelayServer

# The frame source is anything iterable that yields wire frames; a live
# setup points this at the flight controller's serial stream or at the
# simulator's frame feed.
source = FrameQueue()
server = RelayServer(source, listen=("127.0.0.1", 0)).start()
host, port = server.address
print(f"relay serving on {host}:{port}")

received = []
client = RelayClient((host, port),
                     lambda envelope, message: received.append(message)).start()

# Stream one second of a 50 Hz position feed through the relay.
for tick in range(50):
    message = mav.GlobalPositionInt(time_boot_ms=tick * 20,
                                    relative_alt=tick * 40)
    source.put(mav.encode(message, seq=tick))
    time.sleep(0.02)

deadline = time.monotonic() + 5.0
while len(received) < 50 and time.monotonic() < deadline:
    time.sleep(0.01)
print(f"client received {len(received)} messages")
assert [m.time_boot_ms for m in received] == [i * 20 for i in range(50)]

# Per-envelope transport delay between ingestion stamping and arrival.
report = client.latency_report()
print(f"latency over {report.count} envelopes: "
      f"min {report.min_s * 1e3:.2f} ms, p50 {report.p50_s * 1e3:.2f} ms, "
      f"p95 {report.p95_s * 1e3:.2f} ms, max {report.max_s * 1e3:.2f} ms")

client.close()
source.close()
server.stop()
