import math
import random

import pytest

from fpvgl.geodesy import (
    WGS84,
    DegenerateEcefError,
    Ecef,
    Enu,
    Geodetic,
    UndefinedBearingError,
    align_to_east,
    ecef_to_enu,
    ecef_to_geodetic,
    enu_to_ecef,
    enu_to_geodetic,
    geodetic_to_ecef,
    geodetic_to_enu,
)


def test_equator_prime_meridian_maps_to_semi_major_axis():
    q = geodetic_to_ecef(Geodetic(0.0, 0.0, 0.0))
    assert q.x == pytest.approx(6378137.0, abs=1e-6)
    assert q.y == pytest.approx(0.0, abs=1e-6)
    assert q.z == pytest.approx(0.0, abs=1e-6)


def test_north_pole_maps_to_semi_minor_axis():
    q = geodetic_to_ecef(Geodetic(90.0, 0.0, 0.0))
    b = WGS84.a * (1.0 - WGS84.f)
    assert q.x == pytest.approx(0.0, abs=1e-6)
    assert q.y == pytest.approx(0.0, abs=1e-6)
    assert q.z == pytest.approx(b, abs=1e-6)
    assert b == pytest.approx(6356752.314, abs=1e-3)


def test_equator_90_east_axis_symmetry():
    q = geodetic_to_ecef(Geodetic(0.0, 90.0, 0.0))
    assert q.x == pytest.approx(0.0, abs=1e-6)
    assert q.y == pytest.approx(WGS84.a, abs=1e-6)
    assert q.z == pytest.approx(0.0, abs=1e-6)


def test_inverse_of_axis_case():
    p = ecef_to_geodetic(Ecef(WGS84.a, 0.0, 0.0))
    assert p.lat == pytest.approx(0.0, abs=1e-9)
    assert p.lon == pytest.approx(0.0, abs=1e-9)
    assert p.alt == pytest.approx(0.0, abs=1e-6)


def test_round_trip_over_sampled_domain():
    rng = random.Random(2024)
    for _ in range(500):
        p = Geodetic(rng.uniform(-89.9, 89.9), rng.uniform(-179.9, 180.0),
                     rng.uniform(-5000.0, 50000.0))
        q = geodetic_to_ecef(p)
        back = geodetic_to_ecef(ecef_to_geodetic(q))
        assert math.dist((q.x, q.y, q.z), (back.x, back.y, back.z)) < 1e-6


def test_round_trip_at_poles():
    for lat in (90.0, -90.0):
        q = geodetic_to_ecef(Geodetic(lat, 0.0, 123.0))
        p = ecef_to_geodetic(q)
        assert p.lat == pytest.approx(lat, abs=1e-9)
        assert p.alt == pytest.approx(123.0, abs=1e-6)


def test_degenerate_ecef_rejected():
    with pytest.raises(DegenerateEcefError):
        ecef_to_geodetic(Ecef(1.0, 0.0, 0.0))


def test_reference_maps_to_enu_origin():
    ref = Geodetic(43.0008, -78.789, 180.0)
    v = ecef_to_enu(geodetic_to_ecef(ref), ref)
    assert abs(v.e) < 1e-9 and abs(v.n) < 1e-9 and abs(v.u) < 1e-9


def test_small_eastward_offset():
    # 100 m due ellipsoidal east: same latitude and altitude, longitude
    # advanced by 100 / (N cos(lat)) radians.
    ref = Geodetic(43.0, -78.75, 200.0)
    lat = math.radians(ref.lat)
    n_rad = WGS84.a / math.sqrt(1 - WGS84.e2 * math.sin(lat) ** 2)
    dlon = math.degrees(100.0 / ((n_rad + ref.alt) * math.cos(lat)))
    east_point = Geodetic(ref.lat, ref.lon + dlon, ref.alt)
    v = geodetic_to_enu(east_point, ref)
    assert v.e == pytest.approx(100.0, abs=0.01)
    assert abs(v.n) < 0.01
    assert abs(v.u) < 0.01


def test_enu_ecef_inverse_pair():
    rng = random.Random(9)
    ref = Geodetic(42.5, -78.0, 150.0)
    for _ in range(100):
        q = geodetic_to_ecef(Geodetic(ref.lat + rng.uniform(-0.01, 0.01),
                                      ref.lon + rng.uniform(-0.01, 0.01),
                                      ref.alt + rng.uniform(-50, 50)))
        back = enu_to_ecef(ecef_to_enu(q, ref), ref)
        assert math.dist((q.x, q.y, q.z), (back.x, back.y, back.z)) < 1e-9


def test_enu_geodetic_round_trip():
    ref = Geodetic(43.0008, -78.789, 180.0)
    v = Enu(12.5, -3.25, 4.0)
    # Tolerance is the geodetic inverse's, not the linear ENU<->ECEF pair's.
    p = enu_to_geodetic(v, ref)
    back = geodetic_to_enu(p, ref)
    assert back.e == pytest.approx(v.e, abs=1e-6)
    assert back.n == pytest.approx(v.n, abs=1e-6)
    assert back.u == pytest.approx(v.u, abs=1e-6)


# --- alignment ---------------------------------------------------------------

def test_quarter_turn_alignment():
    aligned = align_to_east([Enu(0.0, 10.0, 0.0)], Enu(0.0, 10.0, 0.0))
    assert aligned[0].e == pytest.approx(10.0, abs=1e-12)
    assert aligned[0].n == pytest.approx(0.0, abs=1e-12)


def test_3_4_5_reference_maps_to_east():
    aligned = align_to_east([Enu(3.0, 4.0, 2.0)], Enu(3.0, 4.0, 2.0))
    assert aligned[0].e == pytest.approx(5.0, abs=1e-12)
    assert aligned[0].n == pytest.approx(0.0, abs=1e-12)
    assert aligned[0].u == 2.0


def test_alignment_preserves_pairwise_distances():
    rng = random.Random(17)
    track = [Enu(rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(0, 10))
             for _ in range(40)]
    ref = Enu(rng.uniform(1, 20), rng.uniform(1, 20), 0.0)
    aligned = align_to_east(track, ref)
    for i in range(len(track)):
        for j in range(i + 1, len(track)):
            d0 = math.dist((track[i].e, track[i].n, track[i].u),
                           (track[j].e, track[j].n, track[j].u))
            d1 = math.dist((aligned[i].e, aligned[i].n, aligned[i].u),
                           (aligned[j].e, aligned[j].n, aligned[j].u))
            assert d1 == pytest.approx(d0, rel=1e-9, abs=1e-12)


def test_alignment_idempotent():
    rng = random.Random(23)
    track = [Enu(rng.uniform(-5, 25), rng.uniform(-5, 5), rng.uniform(0, 4))
             for _ in range(20)]
    ref = Enu(14.0, 9.0, 0.0)
    once = align_to_east(track, ref)
    ref_aligned = align_to_east([ref], ref)[0]
    twice = align_to_east(once, ref_aligned)
    for a, b in zip(once, twice):
        assert b.e == pytest.approx(a.e, abs=1e-9)
        assert b.n == pytest.approx(a.n, abs=1e-9)
        assert b.u == a.u


def test_alignment_reference_at_origin_rejected():
    with pytest.raises(UndefinedBearingError):
        align_to_east([Enu(1.0, 1.0, 1.0)], Enu(0.0, 0.0, 5.0))


def test_geodetic_range_validation():
    with pytest.raises(ValueError):
        Geodetic(91.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        Geodetic(0.0, -180.0, 0.0)
