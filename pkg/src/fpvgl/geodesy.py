"""WGS-84 geodetic <-> ECEF <-> ENU conversions and due-east track alignment.

All operations are pure and stateless.  Internal math is double precision
SI (degrees and metres); scaled-integer GPS values are converted at the
caller's boundary.  The inverse geodetic conversion uses Bowring's method
with two refinement iterations, which is sub-millimetre for altitudes
between -5 km and 50 km.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class Ellipsoid:
    """Reference ellipsoid: semi-major axis (m) and flattening."""

    a: float
    f: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("semi-major axis must be positive")
        if not 0 < self.f < 1:
            raise ValueError("flattening must be in (0, 1)")

    @property
    def b(self) -> float:
        """Semi-minor axis."""
        return self.a * (1.0 - self.f)

    @property
    def e2(self) -> float:
        """First eccentricity squared, f(2 - f)."""
        return self.f * (2.0 - self.f)


WGS84 = Ellipsoid(a=6378137.0, f=1.0 / 298.257223563)


@dataclass(frozen=True)
class Geodetic:
    lat: float   # degrees, [-90, 90]
    lon: float   # degrees, (-180, 180]
    alt: float   # metres above the ellipsoid

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} out of range")
        if not -180.0 < self.lon <= 180.0:
            raise ValueError(f"longitude {self.lon} out of range")


@dataclass(frozen=True)
class Ecef:
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class Enu:
    e: float
    n: float
    u: float


class DegenerateEcefError(ValueError):
    """ECEF point too close to the Earth's centre to invert."""


class UndefinedBearingError(ValueError):
    """Alignment reference sits at the horizontal origin."""


def geodetic_to_ecef(p: Geodetic, ell: Ellipsoid = WGS84) -> Ecef:
    lat = math.radians(p.lat)
    lon = math.radians(p.lon)
    sin_lat = math.sin(lat)
    cos_lat = math.cos(lat)
    n = ell.a / math.sqrt(1.0 - ell.e2 * sin_lat * sin_lat)
    x = (n + p.alt) * cos_lat * math.cos(lon)
    y = (n + p.alt) * cos_lat * math.sin(lon)
    z = (n * (1.0 - ell.e2) + p.alt) * sin_lat
    return Ecef(x, y, z)


def ecef_to_geodetic(q: Ecef, ell: Ellipsoid = WGS84) -> Geodetic:
    """Bowring's method, one initial estimate plus two refinements."""
    r = math.sqrt(q.x * q.x + q.y * q.y + q.z * q.z)
    if r < ell.a / 2.0:
        raise DegenerateEcefError(f"|q| = {r:.3f} m is inside the ellipsoid core")
    p = math.hypot(q.x, q.y)
    lon = math.degrees(math.atan2(q.y, q.x))
    if lon <= -180.0:
        lon += 360.0
    b = ell.b
    e2 = ell.e2
    ep2 = e2 / (1.0 - e2)
    if p == 0.0:
        lat = math.copysign(math.pi / 2.0, q.z)
        alt = abs(q.z) - b
        return Geodetic(math.degrees(lat), lon, alt)
    beta = math.atan2(q.z * ell.a, p * b)
    lat = 0.0
    for _ in range(3):
        sb = math.sin(beta)
        cb = math.cos(beta)
        lat = math.atan2(q.z + ep2 * b * sb ** 3, p - e2 * ell.a * cb ** 3)
        beta = math.atan2((1.0 - ell.f) * math.sin(lat), math.cos(lat))
    sin_lat = math.sin(lat)
    cos_lat = math.cos(lat)
    n = ell.a / math.sqrt(1.0 - e2 * sin_lat * sin_lat)
    if abs(cos_lat) > abs(sin_lat):
        alt = p / cos_lat - n
    else:
        alt = q.z / sin_lat - n * (1.0 - e2)
    return Geodetic(math.degrees(lat), lon, alt)


def _enu_axes(ref: Geodetic):
    lat = math.radians(ref.lat)
    lon = math.radians(ref.lon)
    sin_lat, cos_lat = math.sin(lat), math.cos(lat)
    sin_lon, cos_lon = math.sin(lon), math.cos(lon)
    east = (-sin_lon, cos_lon, 0.0)
    north = (-sin_lat * cos_lon, -sin_lat * sin_lon, cos_lat)
    up = (cos_lat * cos_lon, cos_lat * sin_lon, sin_lat)
    return east, north, up


def ecef_to_enu(q: Ecef, ref: Geodetic, ell: Ellipsoid = WGS84) -> Enu:
    origin = geodetic_to_ecef(ref, ell)
    dx = q.x - origin.x
    dy = q.y - origin.y
    dz = q.z - origin.z
    east, north, up = _enu_axes(ref)
    return Enu(east[0] * dx + east[1] * dy + east[2] * dz,
               north[0] * dx + north[1] * dy + north[2] * dz,
               up[0] * dx + up[1] * dy + up[2] * dz)


def enu_to_ecef(v: Enu, ref: Geodetic, ell: Ellipsoid = WGS84) -> Ecef:
    origin = geodetic_to_ecef(ref, ell)
    east, north, up = _enu_axes(ref)
    return Ecef(origin.x + east[0] * v.e + north[0] * v.n + up[0] * v.u,
                origin.y + east[1] * v.e + north[1] * v.n + up[1] * v.u,
                origin.z + east[2] * v.e + north[2] * v.n + up[2] * v.u)


def geodetic_to_enu(p: Geodetic, ref: Geodetic, ell: Ellipsoid = WGS84) -> Enu:
    return ecef_to_enu(geodetic_to_ecef(p, ell), ref, ell)


def enu_to_geodetic(v: Enu, ref: Geodetic, ell: Ellipsoid = WGS84) -> Geodetic:
    return ecef_to_geodetic(enu_to_ecef(v, ref, ell), ell)


def align_to_east(track: Iterable[Enu], reference_point: Enu) -> list[Enu]:
    """Rotate a track about Up so the origin->reference bearing becomes +East.

    Every point is rotated by the same angle; Up components are untouched,
    so the map is a horizontal isometry.
    """
    span = math.hypot(reference_point.e, reference_point.n)
    if span < 1e-9:
        raise UndefinedBearingError(
            "alignment reference coincides with the horizontal origin")
    cos_a = reference_point.e / span
    sin_a = reference_point.n / span
    return [Enu(p.e * cos_a + p.n * sin_a,
                -p.e * sin_a + p.n * cos_a,
                p.u)
            for p in track]


def alignment_angle(reference_point: Enu) -> float:
    """Rotation (radians, about Up, applied clockwise) used by align_to_east."""
    span = math.hypot(reference_point.e, reference_point.n)
    if span < 1e-9:
        raise UndefinedBearingError(
            "alignment reference coincides with the horizontal origin")
    return math.atan2(reference_point.n, reference_point.e)


def track_distances(track: Sequence[Enu]) -> list[float]:
    """Pairwise-consecutive horizontal-plane distances; test/diagnostic aid."""
    return [math.dist((a.e, a.n, a.u), (b.e, b.n, b.u))
            for a, b in zip(track, track[1:])]
