"""Fixed-step simulation loop and session recording glue.

``run_sim`` owns the simulator clock: every tick it samples the pilot's
latest command, advances the dynamics, synthesizes telemetry and hands the
results to whatever sinks are attached (wire-frame bytes for the relay
path, decoded messages for in-process consumers, synthetic camera frames
at their own cadence).  ``simulate_session`` wires the loop to a session
writer so one call produces a fully logged flight, either as fast as the
CPU allows (timestamps follow the simulated clock) or paced to the wall
clock with a live logger thread.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Optional

from .. import mavlink
from ..flightlog import (CameraCell, LoggerRunner, SessionWriter,
                         TelemetrySnapshotCell, open_session)
from .dynamics import (CENTER_STICKS, SimConfig, SimState, StickCommand, arm,
                       disarm, step)
from .pilot import LivePilot, ScriptedPilot
from .scenarios import Scenario
from .telemetry import TelemetrySynth, render_camera_frame

DEFAULT_ARM_LEAD_S = 2.0
DEFAULT_TAIL_S = 0.5


@dataclass
class SimRunSummary:
    ticks: int
    sim_time: float
    wall_time: float
    planned_duration: float
    final_state: SimState
    messages_emitted: int


def run_sim(config: SimConfig, scenario: Scenario, pilot,
            on_frame: Optional[Callable[[bytes], None]] = None,
            on_messages: Optional[Callable[[list], None]] = None,
            on_camera: Optional[Callable[[bytes, bytes, int, float], None]] = None,
            on_tick: Optional[Callable[[int, SimState], None]] = None,
            arm_lead: float = DEFAULT_ARM_LEAD_S,
            tail: float = DEFAULT_TAIL_S,
            duration: Optional[float] = None,
            realtime: bool = False,
            stop: Optional[threading.Event] = None,
            sys_id: int = 1, comp_id: int = 1) -> SimRunSummary:
    """Run one flight; returns totals once the schedule (or stop) ends."""
    if duration is not None:
        total = duration
    elif getattr(pilot, "duration", None) is not None:
        total = arm_lead + pilot.duration + tail
    else:
        raise ValueError("a live pilot needs an explicit duration")

    synth = TelemetrySynth(config)
    state = SimState()
    dt = config.dt
    eps = dt * 0.5
    tick_count = int(round(total / dt))
    camera_every = max(1, round(config.tick_rate / config.camera_rate))
    pilot_duration = getattr(pilot, "duration", None)
    script_done = False
    seq = 0
    messages_emitted = 0
    wall_start = time.monotonic()

    for tick in range(tick_count):
        if stop is not None and stop.is_set():
            break
        if not state.armed and not script_done and state.t >= arm_lead - eps:
            state = arm(state)
        script_t = state.t - arm_lead
        if (state.armed and pilot_duration is not None
                and script_t >= pilot_duration - eps):
            state = disarm(state)
            script_done = True
        if state.armed:
            cmd = pilot.command(state, script_t)
        else:
            cmd = CENTER_STICKS
        state = step(state, cmd, config, dt)
        messages = synth.telemetry_tick(state, cmd, tick)
        messages_emitted += len(messages)
        if on_messages is not None:
            on_messages(messages)
        if on_frame is not None:
            for message in messages:
                on_frame(mavlink.encode(message, seq, sys_id, comp_id))
                seq = (seq + 1) & 0xFF
        if on_camera is not None and tick % camera_every == 0:
            time_ms = int(round(state.t * 1000))
            on_camera(render_camera_frame("front", tick, time_ms),
                      render_camera_frame("bottom", tick, time_ms),
                      tick, state.t)
        if on_tick is not None:
            on_tick(tick, state)
        if realtime:
            deadline = wall_start + (tick + 1) * dt
            delay = deadline - time.monotonic()
            if delay > 0:
                time.sleep(delay)

    return SimRunSummary(
        ticks=tick_count,
        sim_time=state.t,
        wall_time=time.monotonic() - wall_start,
        planned_duration=total,
        final_state=state,
        messages_emitted=messages_emitted,
    )


def simulate_session(config: SimConfig, scenario: Scenario,
                     out_root: str | Path,
                     pilot=None,
                     source_tag: str = "sim",
                     log_rate: float = 10.0,
                     arm_lead: float = DEFAULT_ARM_LEAD_S,
                     tail: float = DEFAULT_TAIL_S,
                     duration: Optional[float] = None,
                     realtime: bool = False,
                     on_frame: Optional[Callable[[bytes], None]] = None,
                     stop: Optional[threading.Event] = None,
                     ) -> tuple[SimRunSummary, Path]:
    """Fly a scenario and record it as a logged session on disk."""
    if pilot is None:
        pilot = ScriptedPilot(scenario, config)
    session = open_session(out_root, source_tag)
    try:
        if realtime:
            summary = _run_realtime(config, scenario, pilot, session,
                                    log_rate, arm_lead, tail, duration,
                                    on_frame, stop)
        else:
            summary = _run_fast(config, scenario, pilot, session, log_rate,
                                arm_lead, tail, duration, on_frame, stop)
    finally:
        session.close()
    return summary, session.path


def _run_fast(config, scenario, pilot, session: SessionWriter, log_rate,
              arm_lead, tail, duration, on_frame, stop) -> SimRunSummary:
    snapshot = TelemetrySnapshotCell()
    latest_camera: list = [None]
    log_every = max(1, round(config.tick_rate / log_rate))
    epoch = datetime.now(timezone.utc).replace(tzinfo=None)

    def on_messages(messages):
        for message in messages:
            snapshot.update(message)

    def on_camera(front, bottom, tick, sim_t):
        latest_camera[0] = (front, bottom)

    def on_tick(tick, state):
        if tick % log_every != 0 or latest_camera[0] is None:
            return
        front, bottom = latest_camera[0]
        session.log_iteration(snapshot.snapshot(), front, bottom,
                              wall_time=epoch + timedelta(seconds=state.t))

    return run_sim(config, scenario, pilot, on_frame=on_frame,
                   on_messages=on_messages, on_camera=on_camera,
                   on_tick=on_tick, arm_lead=arm_lead, tail=tail,
                   duration=duration, realtime=False, stop=stop)


def _run_realtime(config, scenario, pilot, session: SessionWriter, log_rate,
                  arm_lead, tail, duration, on_frame, stop) -> SimRunSummary:
    snapshot = TelemetrySnapshotCell()
    camera = CameraCell()
    if duration is not None:
        total = duration
    else:
        total = arm_lead + pilot.duration + tail
    runner = LoggerRunner(session, snapshot, camera, rate=log_rate)
    logger_stop = threading.Event()
    logger_thread = threading.Thread(
        target=runner.run, kwargs={"duration": total, "stop": logger_stop},
        daemon=True)

    def on_messages(messages):
        for message in messages:
            snapshot.update(message)

    def on_camera(front, bottom, tick, sim_t):
        camera.set(front, bottom)

    started = threading.Event()

    def on_tick(tick, state):
        if tick == 0:
            logger_thread.start()
            started.set()

    try:
        summary = run_sim(config, scenario, pilot, on_frame=on_frame,
                          on_messages=on_messages, on_camera=on_camera,
                          on_tick=on_tick, arm_lead=arm_lead, tail=tail,
                          duration=duration, realtime=True, stop=stop)
    finally:
        if stop is not None and stop.is_set():
            logger_stop.set()  # aborted run: cut the logger short too
        if started.is_set():
            logger_thread.join(timeout=total + 10.0)
        logger_stop.set()
    return summary
