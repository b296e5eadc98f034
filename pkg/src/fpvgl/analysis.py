"""Trajectory reconstruction and maneuver statistics for logged flights.

A session's GPS rows become a ``LocalTrack``: ENU coordinates about the
launch-pad reference, rotated so the line toward a user-chosen reference
point runs due east.  In the aligned frame x records longitudinal motion,
y lateral motion and z height.  Per-task maneuver segments are then cut
out of the track and summarized the same way for every platform, physical
or simulated, so the resulting tables are directly comparable.

Deviations are population standard deviations (stated in the report
footer); short segments would make the sample correction noisy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .flightlog import FlightSession, session_reference_geodetic
from .geodesy import (Enu, Geodetic, align_to_east, ecef_to_enu,
                      geodetic_to_ecef)
from .sim.scenarios import TASK_TITLES

HOVER_ALTITUDE_M = 4.0   # segment-entry threshold for the hover task
HOVER_WINDOW_S = 10.0
ENTRY_MARGIN_M = 2.0     # longitudinal margin for the cruise tasks


class AnalysisError(RuntimeError):
    pass


class ThresholdNeverReached(AnalysisError):
    pass


@dataclass(frozen=True)
class LocalTrack:
    """Aligned local-frame trajectory; arrays share one sample axis."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.z) == n):
            raise ValueError("track arrays must have equal length")
        if n >= 2 and not np.all(np.diff(self.t) > 0):
            raise ValueError("track timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True)
class ManeuverSegment:
    task: int
    start_index: int
    end_index: int   # inclusive
    rule: str

    def __post_init__(self):
        if not 0 <= self.start_index < self.end_index:
            raise ValueError("segment must span at least two samples")


@dataclass(frozen=True)
class TaskMetrics:
    task: int
    platform_tag: str
    hover_distance_to_origin_m: Optional[float]  # task 1 only
    lateral_deviation_m: Optional[float]         # tasks 2-4
    height_deviation_m: float
    trail_time_s: float

    def __post_init__(self):
        if (self.hover_distance_to_origin_m is None) == (
                self.lateral_deviation_m is None):
            raise ValueError(
                "exactly one of hover distance / lateral deviation applies")


def build_track(session: FlightSession, reference_point: Geodetic,
                altitude_mode: str = "relative") -> LocalTrack:
    """ENU about the launch reference, rotated east toward reference_point.

    ``altitude_mode`` 'relative' takes z from the logged arm-baselined
    altitude; 'gps' uses the ENU Up component of the GPS fix.
    """
    if altitude_mode not in ("relative", "gps"):
        raise ValueError("altitude_mode must be 'relative' or 'gps'")
    rows = [row for row in session.rows if row.has_gps()]
    if len(rows) < 2:
        raise AnalysisError("need at least two rows with valid GPS")
    origin = session_reference_geodetic(session)

    enu_points = [ecef_to_enu(geodetic_to_ecef(row.geodetic()), origin)
                  for row in rows]
    reference_enu = ecef_to_enu(geodetic_to_ecef(reference_point), origin)
    aligned = align_to_east(enu_points, reference_enu)

    t0 = rows[0].wall_timestamp
    t = np.array([(row.wall_timestamp - t0).total_seconds() for row in rows])
    x = np.array([p.e for p in aligned])
    y = np.array([p.n for p in aligned])
    if altitude_mode == "relative":
        z = np.array([
            (row.rel_alt_mm if row.rel_alt_mm is not None else 0) / 1000.0
            for row in rows])
    else:
        z = np.array([p.u for p in aligned])
    return LocalTrack(t=t, x=x, y=y, z=z)


def extract_segment(track: LocalTrack, task: int,
                    hover_altitude: float = HOVER_ALTITUDE_M,
                    hover_window: float = HOVER_WINDOW_S,
                    entry_margin: float = ENTRY_MARGIN_M) -> ManeuverSegment:
    """Cut the maneuvering portion out of a trail.

    Task 1: from the first sample at/above the hover altitude through the
    following ``hover_window`` seconds.  Tasks 2-4: from the first sample
    ``entry_margin`` past the initial longitudinal position until the last
    sample at least ``entry_margin`` (in |x|) from the final one; measuring
    the exit margin from the landing sample keeps the rule meaningful both
    for out-and-back trails and for imperfect landings.
    """
    if task not in (1, 2, 3, 4):
        raise ValueError("task must be 1..4")
    if task == 1:
        above = np.nonzero(track.z >= hover_altitude)[0]
        if len(above) == 0:
            raise ThresholdNeverReached(
                f"altitude never reached {hover_altitude} m "
                f"(max {track.z.max():.3f} m)")
        start = int(above[0])
        cutoff = track.t[start] + hover_window
        end = int(np.nonzero(track.t <= cutoff)[0][-1])
        rule = (f"z >= {hover_altitude} m for {hover_window} s")
    else:
        x0 = track.x[0]
        x_end = track.x[-1]
        entered = np.nonzero(track.x >= x0 + entry_margin)[0]
        if len(entered) == 0:
            raise ThresholdNeverReached(
                f"longitudinal position never reached "
                f"{entry_margin} m past the start")
        start = int(entered[0])
        away = np.nonzero(np.abs(track.x - x_end) >= entry_margin)[0]
        if len(away) == 0:
            raise ThresholdNeverReached(
                f"trail never {entry_margin} m (longitudinally) "
                f"from its landing position")
        end = int(away[-1])
        rule = (f"x within [start + {entry_margin} m, "
                f"landing - {entry_margin} m]")
    if end <= start:
        raise ThresholdNeverReached(
            f"segment rule produced an empty span ({start}..{end})")
    return ManeuverSegment(task=task, start_index=start, end_index=end,
                           rule=rule)


def compute_metrics(track: LocalTrack, segment: ManeuverSegment, task: int,
                    trail_bounds: Optional[tuple[float, float]] = None,
                    platform_tag: str = "unknown") -> TaskMetrics:
    """Per-trail statistics row over the maneuver segment.

    Trail time spans the whole logged trail (takeoff to landing), not just
    the segment, unless explicit bounds are given.
    """
    if segment.end_index >= len(track):
        raise AnalysisError("segment indices out of range")
    sl = slice(segment.start_index, segment.end_index + 1)
    if segment.end_index - segment.start_index < 1:
        raise AnalysisError("segment shorter than two samples")
    x = track.x[sl]
    y = track.y[sl]
    z = track.z[sl]
    if trail_bounds is not None:
        trail_time = trail_bounds[1] - trail_bounds[0]
    else:
        trail_time = float(track.t[-1] - track.t[0])
    if task == 1:
        hover = float(np.mean(np.hypot(x, y)))
        lateral = None
    else:
        hover = None
        lateral = float(np.std(y))
    return TaskMetrics(
        task=task,
        platform_tag=platform_tag,
        hover_distance_to_origin_m=hover,
        lateral_deviation_m=lateral,
        height_deviation_m=float(np.std(z)),
        trail_time_s=trail_time,
    )


# --- reporting ----------------------------------------------------------------

_METRIC_COLUMNS = {
    1: ("Hovering distance to origin (m)", "hover_distance_to_origin_m"),
    2: ("Lateral deviation (m)", "lateral_deviation_m"),
    3: ("Lateral deviation (m)", "lateral_deviation_m"),
    4: ("Lateral deviation (m)", "lateral_deviation_m"),
}

REPORT_FOOTER = ("Deviations are population standard deviations over the "
                 "maneuver segment.")


def render_report(results: list[tuple[TaskMetrics, Optional[LocalTrack]]],
                  out_dir: Optional[str | Path] = None) -> str:
    """Per-task comparison tables plus plain-text series files per flight.

    Series files (written when ``out_dir`` is given and a track accompanies
    the metrics): t-x, t-y, t-z columns, the x-y bird view and the x-y-z
    polyline, one sample per line, reloadable with ``numpy.loadtxt``.
    """
    if not results:
        raise ValueError("nothing to report")
    by_task: dict[int, list[TaskMetrics]] = {}
    for metrics, _ in results:
        by_task.setdefault(metrics.task, []).append(metrics)

    lines: list[str] = []
    for task in sorted(by_task):
        first_column, attr = _METRIC_COLUMNS[task]
        header = ["Platform used", first_column, "Height deviation (m)",
                  "Trail time length (s)"]
        table = [header]
        for metrics in by_task[task]:
            table.append([
                metrics.platform_tag,
                f"{getattr(metrics, attr):.4f}",
                f"{metrics.height_deviation_m:.4f}",
                f"{metrics.trail_time_s:.4f}",
            ])
        widths = [max(len(row[i]) for row in table)
                  for i in range(len(header))]
        lines.append(f"Task {task}: {TASK_TITLES[task]} "
                     "flown trails information")
        for row in table:
            lines.append("  ".join(cell.ljust(width)
                                   for cell, width in zip(row, widths)).rstrip())
        lines.append("")
    lines.append(REPORT_FOOTER)
    report = "\n".join(lines) + "\n"

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(report, encoding="utf-8")
        for metrics, track in results:
            if track is None:
                continue
            stem = f"{metrics.platform_tag}_task{metrics.task}"
            series = {
                "tx": np.column_stack([track.t, track.x]),
                "ty": np.column_stack([track.t, track.y]),
                "tz": np.column_stack([track.t, track.z]),
                "xy": np.column_stack([track.x, track.y]),
                "xyz": np.column_stack([track.x, track.y, track.z]),
            }
            for suffix, data in series.items():
                np.savetxt(out / f"{stem}_{suffix}.txt", data, fmt="%.17g")
    return report
