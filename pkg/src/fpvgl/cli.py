"""Command-line entry point tying the toolkit's pieces into workflows.

Subcommands: ``sim`` (fly a task and log a session, optionally serving the
frame stream), ``relay`` (bridge a frame source to ground clients), ``log``
(record a relay stream), ``analyze`` (trajectory metrics and report),
``export`` (imitation-learning episodes) and ``bridge`` (relay-to-browser
console translator).  Everything runs headless.  ``--seed`` feeds every
stochastic element, so identical invocations reproduce identical bytes.
"""

from __future__ import annotations

import argparse
import os
import sys
import threading
from pathlib import Path

ROOT_ENV = "FPVGL_ROOT"


def _default_root() -> str:
    return os.environ.get(ROOT_ENV, ".")


def _addr(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(
            f"expected host:port, got {text!r}")
    return (host, int(port))


def _channel_map(text: str) -> dict[str, int]:
    mapping = {}
    try:
        for item in text.split(","):
            axis, _, channel = item.partition("=")
            mapping[axis.strip()] = int(channel)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad channel map {text!r}") from exc
    return mapping


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpvgl",
        description="FPV quadcopter ground-link toolkit")
    parser.add_argument("--verbose", action="store_true",
                        help="chatty progress output")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("sim", help="fly a task in the simulator")
    sim.add_argument("--task", type=int, choices=(1, 2, 3, 4), required=True)
    sim.add_argument("--pilot", choices=("scripted", "live"),
                     default="scripted")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--gps-noise", type=float, default=0.0,
                     help="horizontal GPS noise sigma in metres")
    sim.add_argument("--listen", type=_addr, default=None,
                     help="serve raw telemetry frames here (relay source)")
    sim.add_argument("--cockpit", type=_addr, default=None,
                     help="serve camera frames / accept stick input here")
    sim.add_argument("--scenario", type=Path, default=None,
                     help="scenario file overriding the built-in course")
    sim.add_argument("--out", type=Path, default=None,
                     help=f"session root (default ${ROOT_ENV} or cwd)")
    sim.add_argument("--duration", type=float, default=None,
                     help="run length in seconds (required for live pilot)")
    sim.add_argument("--rate", type=float, default=10.0,
                     help="logger rows per second")
    sim.add_argument("--realtime", action="store_true",
                     help="pace the loop to the wall clock")
    sim.set_defaults(func=cmd_sim)

    relay_p = sub.add_parser("relay", help="serve a frame source to clients")
    relay_p.add_argument("--source", required=True,
                         help="host:port of a frame feed, or a serial device path")
    relay_p.add_argument("--listen", type=_addr, required=True)
    relay_p.add_argument("--queue-depth", type=int, default=None)
    relay_p.set_defaults(func=cmd_relay)

    log_p = sub.add_parser("log", help="record a relay stream to a session")
    log_p.add_argument("--from", dest="source", type=_addr, required=True)
    log_p.add_argument("--out", type=Path, default=None)
    log_p.add_argument("--rate", type=float, default=10.0)
    log_p.add_argument("--duration", type=float, default=None)
    log_p.set_defaults(func=cmd_log)

    analyze_p = sub.add_parser("analyze", help="trajectory metrics report")
    analyze_p.add_argument("--session", type=Path, required=True)
    analyze_p.add_argument("--task", type=int, choices=(1, 2, 3, 4),
                           required=True)
    analyze_p.add_argument("--ref-lat", type=float, required=True,
                           help="east-alignment reference latitude, degrees")
    analyze_p.add_argument("--ref-lon", type=float, required=True)
    analyze_p.add_argument("--ref-alt", type=float, default=0.0)
    analyze_p.add_argument("--alt-mode", choices=("relative", "gps"),
                           default="relative")
    analyze_p.add_argument("--platform", default=None,
                           help="row label (default: session source tag)")
    analyze_p.add_argument("--out", type=Path, default=None,
                           help="directory for report.txt and series files")
    analyze_p.set_defaults(func=cmd_analyze)

    export_p = sub.add_parser("export", help="episode dataset from a session")
    export_p.add_argument("--session", type=Path, required=True)
    export_p.add_argument("--scenario", type=Path, default=None,
                          help="scenario file (or use --task for built-ins)")
    export_p.add_argument("--task", type=int, choices=(1, 2, 3, 4),
                          default=None)
    export_p.add_argument("--out", type=Path, required=True)
    export_p.add_argument("--channels", type=_channel_map, default=None,
                          help="e.g. roll=1,pitch=2,throttle=3,yaw=4")
    export_p.set_defaults(func=cmd_export)

    bridge_p = sub.add_parser("bridge",
                              help="translate relay traffic for the console")
    bridge_p.add_argument("--relay", type=_addr, required=True)
    bridge_p.add_argument("--listen", type=_addr, required=True,
                          help="WebSocket address the console connects to")
    bridge_p.add_argument("--cockpit", type=_addr, default=None,
                          help="simulator cockpit for frames and stick input")
    bridge_p.set_defaults(func=cmd_bridge)

    return parser


def cmd_sim(args) -> int:
    from .sim import (CommandCell, LivePilot, ScriptedPilot, SimConfig,
                      builtin_scenario, load_scenario, simulate_session)
    from .sim.server import CockpitServer, FrameFeedServer

    config = SimConfig(seed=args.seed, gps_noise_sigma=args.gps_noise)
    scenario = (load_scenario(args.scenario) if args.scenario
                else builtin_scenario(args.task))
    out_root = args.out if args.out is not None else Path(_default_root())
    out_root.mkdir(parents=True, exist_ok=True)

    feed = None
    cockpit = None
    on_frame = None
    try:
        if args.listen is not None:
            feed = FrameFeedServer(args.listen).start()
            on_frame = feed.send
            if args.verbose:
                print(f"frame feed on {feed.address[0]}:{feed.address[1]}")
        realtime = args.realtime
        if args.pilot == "live":
            if args.duration is None:
                raise SystemExit2("--pilot live needs --duration")
            cell = CommandCell()
            if args.cockpit is not None:
                cockpit = CockpitServer(args.cockpit, cell).start()
            pilot = LivePilot(cell)
            realtime = True
        else:
            pilot = ScriptedPilot(scenario, config)
            if args.cockpit is not None:
                cockpit = CockpitServer(args.cockpit).start()

        stop = threading.Event()
        try:
            summary, session_path = simulate_session(
                config, scenario, out_root, pilot=pilot,
                log_rate=args.rate, duration=args.duration,
                realtime=realtime, on_frame=on_frame, stop=stop)
        except KeyboardInterrupt:
            stop.set()
            raise
        print(session_path)
        if args.verbose:
            print(f"ticks={summary.ticks} sim_time={summary.sim_time:.2f}s "
                  f"wall={summary.wall_time:.2f}s")
        return 0
    finally:
        if feed is not None:
            feed.stop()
        if cockpit is not None:
            cockpit.stop()


def _serial_source(path: str):
    from .mavlink import FrameSplitter

    splitter = FrameSplitter()
    with open(path, "rb", buffering=0) as handle:
        while True:
            chunk = handle.read(4096)
            if not chunk:
                return
            yield from splitter.feed(chunk)


def _tcp_source(address: tuple[str, int]):
    import socket

    from .mavlink import FrameSplitter

    sock = socket.create_connection(address)
    splitter = FrameSplitter()
    try:
        while True:
            chunk = sock.recv(65536)
            if not chunk:
                return
            yield from splitter.feed(chunk)
    finally:
        sock.close()


def cmd_relay(args) -> int:
    from .relay import RelayServer

    if ":" in args.source and not args.source.startswith("/"):
        source = _tcp_source(_addr(args.source))
    else:
        source = _serial_source(args.source)
    server = RelayServer(source, args.listen,
                         queue_depth=args.queue_depth).start()
    print(f"relaying on {server.address[0]}:{server.address[1]}")
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def cmd_log(args) -> int:
    from .flightlog import (CameraCell, LoggerRunner, TelemetrySnapshotCell,
                            open_session)
    from .relay import RelayClient
    from .sim.telemetry import render_camera_frame

    out_root = args.out if args.out is not None else Path(_default_root())
    out_root.mkdir(parents=True, exist_ok=True)
    snapshot_cell = TelemetrySnapshotCell()
    camera_cell = CameraCell()
    # No physical cameras behind a relay link: store placeholder frames so
    # every row still carries its synchronized pair.
    placeholder = render_camera_frame("front", 0, 0)
    camera_cell.set(placeholder, render_camera_frame("bottom", 0, 0))

    client = RelayClient(args.source,
                         lambda env, msg: snapshot_cell.update(msg)).start()
    session = open_session(out_root, "relay")
    runner = LoggerRunner(session, snapshot_cell, camera_cell,
                          rate=args.rate)
    duration = args.duration if args.duration is not None else float("inf")
    try:
        rows = runner.run(duration=duration)
        if args.verbose:
            print(f"logged {rows} rows")
    except KeyboardInterrupt:
        pass
    finally:
        client.close()
        session.close()
    print(session.path)
    return 0


def cmd_analyze(args) -> int:
    from .analysis import (build_track, compute_metrics, extract_segment,
                           render_report)
    from .flightlog import read_session
    from .geodesy import Geodetic

    session = read_session(args.session)
    reference = Geodetic(args.ref_lat, args.ref_lon, args.ref_alt)
    track = build_track(session, reference, altitude_mode=args.alt_mode)
    segment = extract_segment(track, args.task)
    platform = args.platform or session.manifest.source
    metrics = compute_metrics(track, segment, args.task,
                              platform_tag=platform)
    report = render_report([(metrics, track)], out_dir=args.out)
    print(report, end="")
    return 0


def cmd_export(args) -> int:
    from .episodes import export_episode, write_dataset
    from .flightlog import read_session
    from .sim import builtin_scenario, load_scenario

    if (args.scenario is None) == (args.task is None):
        raise SystemExit2("give exactly one of --scenario or --task")
    scenario = (load_scenario(args.scenario) if args.scenario
                else builtin_scenario(args.task))
    session = read_session(args.session)
    dataset = export_episode(session, scenario, channel_map=args.channels)
    write_dataset(dataset, args.out)
    print(f"{args.out} ({len(dataset.steps)} steps)")
    return 0


def cmd_bridge(args) -> int:
    from .bridge import Bridge

    bridge = Bridge(relay_addr=args.relay, listen=args.listen,
                    cockpit_addr=args.cockpit)
    try:
        bridge.run_forever()
    except KeyboardInterrupt:
        pass
    finally:
        bridge.stop()
    return 0


class SystemExit2(Exception):
    """Usage-level error discovered after argparse; exits with code 2."""


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 0
    except Exception as exc:  # single-line, machine-parsable failure report
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
