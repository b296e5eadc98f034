import math
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np
import pytest

from fpvgl.analysis import (AnalysisError, LocalTrack, ManeuverSegment,
                            TaskMetrics, ThresholdNeverReached, build_track,
                            compute_metrics, extract_segment, render_report)
from fpvgl.flightlog import FlightSession, IterationRow, SessionManifest
from fpvgl.geodesy import Enu, Geodetic, enu_to_geodetic

T0 = datetime(2024, 3, 1, 10, 0, 0)
ORIGIN = Geodetic(43.0008, -78.789, 180.0)


def make_row(t_s, enu=None, rel_alt_m=None, servo_pwm=1400):
    if enu is not None:
        geo = enu_to_geodetic(Enu(*enu), ORIGIN)
        lat, lon = round(geo.lat * 1e7), round(geo.lon * 1e7)
        alt = round(geo.alt * 1000)
        rel = round((rel_alt_m if rel_alt_m is not None else enu[2]) * 1000)
    else:
        lat = lon = alt = rel = None
    return IterationRow(
        wall_timestamp=T0 + timedelta(seconds=t_s), time_boot_ms=int(t_s * 1000),
        lat_1e7=lat, lon_1e7=lon, alt_mm=alt, rel_alt_mm=rel,
        vx_cms=0, vy_cms=0, vz_cms=0, hdg_cdeg=0,
        groundspeed_ms=0.0, climb_ms=0.0, roll_rad=0.0, pitch_rad=0.0,
        yaw_rad=0.0, rc_us=(1500,) * 8,
        servo_us=(servo_pwm,) * 4 + (0,) * 4,
        front_frame="front/x.png", bottom_frame="bottom/x.png")


def make_session(rows):
    manifest = SessionManifest(session_id="test", row_count=len(rows),
                               front_frame_count=len(rows),
                               bottom_frame_count=len(rows),
                               start_wall=None, end_wall=None, source="test")
    return FlightSession(path=Path("."), rows=tuple(rows), manifest=manifest)


def east_reference(distance=20.0):
    return enu_to_geodetic(Enu(distance, 0.0, 0.0), ORIGIN)


def ramp_track(dt=0.1):
    """z ramps 0 -> 5 m over 5 s, then holds 5 m for 20 s."""
    t = np.arange(0.0, 25.0 + dt / 2, dt)
    z = np.minimum(t, 5.0)
    return LocalTrack(t=t, x=np.zeros_like(t), y=np.zeros_like(t), z=z)


# --- build_track --------------------------------------------------------------

def test_track_of_stationary_rows_is_origin():
    rows = [make_row(i * 0.1, enu=(0.0, 0.0, 0.0)) for i in range(20)]
    track = build_track(make_session(rows), east_reference())
    assert np.all(np.abs(track.x) < 1e-6)
    assert np.all(np.abs(track.y) < 1e-6)


def test_track_skips_leading_rows_without_gps():
    rows = [make_row(i * 0.1) for i in range(5)]
    rows += [make_row(0.5 + i * 0.1, enu=(i * 0.2, 0.0, 1.0))
             for i in range(10)]
    track = build_track(make_session(rows), east_reference())
    assert len(track) == 10
    assert track.t[0] == 0.0  # rebased to the first usable row
    # Positions carry the 1e-7 degree wire quantization, about 1 cm per LSB.
    assert track.x[-1] == pytest.approx(1.8, abs=0.02)


def test_track_reference_alignment_rotates_course():
    # Course flown due north; reference point also north: aligned x = course.
    rows = [make_row(i * 0.1, enu=(0.0, i * 0.2, 1.0)) for i in range(30)]
    reference = enu_to_geodetic(Enu(0.0, 15.0, 0.0), ORIGIN)
    track = build_track(make_session(rows), reference)
    assert track.x[-1] == pytest.approx(29 * 0.2, abs=0.02)
    assert np.all(np.abs(track.y) < 0.02)


def test_track_altitude_modes():
    # A grounded pre-arm row pins the pad reference; later rows hover at 2 m
    # true altitude while the flight controller reports 1.5 m arm-relative.
    rows = [make_row(0.0, enu=(0.0, 0.0, 0.0), rel_alt_m=0.0, servo_pwm=1000)]
    rows += [make_row(0.6 + i * 0.1, enu=(0.0, 0.0, 2.0), rel_alt_m=1.5)
             for i in range(5)]
    session = make_session(rows)
    relative = build_track(session, east_reference(), altitude_mode="relative")
    gps = build_track(session, east_reference(), altitude_mode="gps")
    assert np.all(relative.z[1:] == 1.5)
    assert gps.z[-1] == pytest.approx(2.0, abs=1e-3)


def test_track_requires_two_gps_rows():
    with pytest.raises(AnalysisError):
        build_track(make_session([make_row(0.0, enu=(0, 0, 0))]),
                    east_reference())


def test_track_rejects_unknown_altitude_mode():
    rows = [make_row(i * 0.1, enu=(0, 0, 0)) for i in range(3)]
    with pytest.raises(ValueError):
        build_track(make_session(rows), east_reference(), altitude_mode="agl")


# --- extract_segment ----------------------------------------------------------

def brute_force_task1(track, altitude=4.0, window=10.0):
    start = None
    for i, z in enumerate(track.z):
        if z >= altitude:
            start = i
            break
    if start is None:
        return None
    end = start
    for i in range(len(track)):
        if track.t[i] <= track.t[start] + window:
            end = i
    return start, end


def brute_force_cruise(track, margin=2.0):
    x0 = track.x[0]
    x_end = track.x[-1]
    start = None
    for i, x in enumerate(track.x):
        if x >= x0 + margin:
            start = i
            break
    if start is None:
        return None
    end = None
    for i, x in enumerate(track.x):
        if abs(x - x_end) >= margin:
            end = i
    return start, end


def test_task1_ramp_oracle():
    track = ramp_track()
    segment = extract_segment(track, 1)
    expected = brute_force_task1(track)
    assert (segment.start_index, segment.end_index) == expected
    # Ramp construction: crossing at t = 4.0, window end at t = 14.0.
    assert track.t[segment.start_index] == pytest.approx(4.0)
    assert track.t[segment.end_index] == pytest.approx(14.0)


def test_task2_linear_oracle():
    t = np.linspace(0.0, 20.0, 201)
    x = t.copy()  # 0 -> 20 m linear at 1 m/s
    track = LocalTrack(t=t, x=x, y=np.zeros_like(t), z=np.full_like(t, 3.0))
    segment = extract_segment(track, 2)
    expected = brute_force_cruise(track)
    assert (segment.start_index, segment.end_index) == expected
    assert track.x[segment.start_index] >= 2.0
    assert track.x[segment.start_index - 1] < 2.0
    assert track.x[segment.end_index] <= 18.0 + 1e-9
    assert track.x[segment.end_index + 1] > 18.0


def test_out_and_back_trail_segments_on_return_leg():
    t = np.arange(0.0, 30.0, 0.1)
    x = 15.0 - np.abs(t - 15.0)  # 0 -> 15 -> 0
    track = LocalTrack(t=t, x=x, y=np.zeros_like(t), z=np.full_like(t, 3.0))
    segment = extract_segment(track, 4)
    expected = brute_force_cruise(track)
    assert (segment.start_index, segment.end_index) == expected
    # The segment must end on the return leg, past the turn-around point.
    assert segment.end_index > int(np.argmax(x))
    assert x[segment.end_index] == pytest.approx(2.0, abs=0.2)


def test_task1_threshold_never_reached():
    t = np.arange(0.0, 10.0, 0.1)
    track = LocalTrack(t=t, x=np.zeros_like(t), y=np.zeros_like(t),
                       z=np.full_like(t, 3.5))
    with pytest.raises(ThresholdNeverReached):
        extract_segment(track, 1)


def test_cruise_threshold_never_reached():
    t = np.arange(0.0, 10.0, 0.1)
    track = LocalTrack(t=t, x=np.full_like(t, 0.5), y=np.zeros_like(t),
                       z=np.zeros_like(t))
    with pytest.raises(ThresholdNeverReached):
        extract_segment(track, 2)


def test_translation_invariance_of_cruise_rule():
    t = np.arange(0.0, 20.0, 0.1)
    x = np.minimum(t * 1.4, 20.0) + 0.3 * np.sin(t)
    y = 0.25 * np.cos(t / 2)
    track = LocalTrack(t=t, x=x, y=y, z=np.full_like(t, 3.0))
    shifted = LocalTrack(t=t, x=x + 57.0, y=y - 11.0, z=track.z)
    seg_a = extract_segment(track, 2)
    seg_b = extract_segment(shifted, 2)
    assert (seg_a.start_index, seg_a.end_index) == (seg_b.start_index,
                                                    seg_b.end_index)
    metrics_a = compute_metrics(track, seg_a, 2, platform_tag="a")
    metrics_b = compute_metrics(shifted, seg_b, 2, platform_tag="b")
    assert metrics_a.lateral_deviation_m == pytest.approx(
        metrics_b.lateral_deviation_m, rel=1e-12)
    assert metrics_a.height_deviation_m == metrics_b.height_deviation_m


# --- compute_metrics ----------------------------------------------------------

def constant_track(x, y, n=50):
    t = np.arange(n) * 0.1
    return LocalTrack(t=t, x=np.full(n, float(x)), y=np.full(n, float(y)),
                      z=np.full(n, 4.0))


def test_constant_hover_metrics():
    track = constant_track(0.3, 0.4)
    segment = ManeuverSegment(task=1, start_index=0, end_index=len(track) - 1,
                              rule="all")
    metrics = compute_metrics(track, segment, 1, platform_tag="sim")
    assert metrics.hover_distance_to_origin_m == pytest.approx(0.5, rel=1e-12)
    assert metrics.height_deviation_m == 0.0
    assert metrics.lateral_deviation_m is None


def test_alternating_lateral_deviation():
    n = 100
    t = np.arange(n) * 0.1
    y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    track = LocalTrack(t=t, x=t, y=y, z=np.full(n, 3.0))
    segment = ManeuverSegment(task=2, start_index=0, end_index=n - 1,
                              rule="all")
    metrics = compute_metrics(track, segment, 2, platform_tag="sim")
    assert metrics.lateral_deviation_m == pytest.approx(1.0, rel=1e-12)


def test_deviation_matches_two_pass_oracle():
    rng = np.random.default_rng(7)
    n = 400
    t = np.arange(n) * 0.1
    y = rng.normal(0.0, 0.8, n)
    z = rng.normal(3.0, 0.2, n)
    track = LocalTrack(t=t, x=np.linspace(0, 30, n), y=y, z=z)
    segment = extract_segment(track, 2)
    metrics = compute_metrics(track, segment, 2, platform_tag="sim")

    sl = slice(segment.start_index, segment.end_index + 1)
    mean_y = sum(y[sl]) / len(y[sl])
    var_y = sum((value - mean_y) ** 2 for value in y[sl]) / len(y[sl])
    assert metrics.lateral_deviation_m == pytest.approx(math.sqrt(var_y),
                                                        rel=1e-12)


def test_trail_time_spans_whole_track():
    track = constant_track(0.0, 0.0, n=100)
    segment = ManeuverSegment(task=1, start_index=10, end_index=20, rule="x")
    metrics = compute_metrics(track, segment, 1, platform_tag="sim")
    assert metrics.trail_time_s == pytest.approx(9.9)
    bounded = compute_metrics(track, segment, 1, trail_bounds=(2.0, 65.5),
                              platform_tag="sim")
    assert bounded.trail_time_s == pytest.approx(63.5)


def test_metrics_field_exclusivity_enforced():
    with pytest.raises(ValueError):
        TaskMetrics(task=1, platform_tag="sim",
                    hover_distance_to_origin_m=0.1,
                    lateral_deviation_m=0.2, height_deviation_m=0.0,
                    trail_time_s=1.0)


def test_segment_requires_two_samples():
    with pytest.raises(ValueError):
        ManeuverSegment(task=1, start_index=5, end_index=5, rule="x")


# --- render_report ------------------------------------------------------------

def metrics_for(task, tag, value=1.0):
    return TaskMetrics(
        task=task, platform_tag=tag,
        hover_distance_to_origin_m=value if task == 1 else None,
        lateral_deviation_m=None if task == 1 else value,
        height_deviation_m=0.1, trail_time_s=60.0)


def test_report_table_structure():
    report = render_report([(metrics_for(2, "physical", 0.6728), None),
                            (metrics_for(2, "sim", 1.0038), None)])
    lines = report.splitlines()
    assert lines[0].startswith("Task 2: Flying from point A to B")
    header = lines[1]
    assert "Lateral deviation (m)" in header
    assert "Height deviation (m)" in header
    assert "Trail time length (s)" in header
    assert "physical" in lines[2] and "0.6728" in lines[2]
    assert "sim" in lines[3] and "1.0038" in lines[3]
    assert "population standard deviations" in report


def test_report_task1_column_head():
    report = render_report([(metrics_for(1, "sim", 0.3691), None)])
    assert "Hovering distance to origin (m)" in report
    assert "0.3691" in report


def test_report_series_files_round_trip(tmp_path):
    n = 40
    t = np.arange(n) * 0.1
    track = LocalTrack(t=t, x=np.sin(t), y=np.cos(t), z=t / 10)
    metrics = metrics_for(3, "sim")
    render_report([(metrics, track)], out_dir=tmp_path)
    for suffix, columns in (("tx", (track.t, track.x)),
                            ("ty", (track.t, track.y)),
                            ("tz", (track.t, track.z)),
                            ("xy", (track.x, track.y)),
                            ("xyz", (track.x, track.y, track.z))):
        loaded = np.loadtxt(tmp_path / f"sim_task3_{suffix}.txt")
        assert np.array_equal(loaded, np.column_stack(columns))
    assert (tmp_path / "report.txt").is_file()


def test_report_rejects_empty():
    with pytest.raises(ValueError):
        render_report([])


# --- pipeline closure ----------------------------------------------------------

def test_same_seed_yields_identical_metrics(tmp_path):
    from fpvgl.flightlog import read_session
    from fpvgl.sim import SimConfig, builtin_scenario, simulate_session

    config = SimConfig(gps_noise_sigma=0.3, seed=77)
    scenario = builtin_scenario(1)
    reference = enu_to_geodetic(Enu(20.0, 0.0, 0.0), config.origin)

    def run(tag):
        _, session_dir = simulate_session(config, scenario, tmp_path,
                                          source_tag=tag)
        session = read_session(session_dir)
        track = build_track(session, reference)
        segment = extract_segment(track, 1)
        return compute_metrics(track, segment, 1, platform_tag="twin")

    assert run("a") == run("b")
