"""
Geodetic coordinate chain: GPS degrees -> ECEF -> local ENU -> aligned XYZ
==========================================================================

The conversions behind every trajectory plot: scaled-integer GPS becomes
Earth-centred Cartesian, then local East-North-Up about the launch pad,
then a frame rotated so the course axis runs due east.
"""

import math

from fpvgl.geodesy import (Enu, Geodetic, align_to_east, ecef_to_geodetic,
                           geodetic_to_ecef, geodetic_to_enu)

# A launch pad and a landing spot a short flight away.
pad = Geodetic(lat=43.0008, lon=-78.7890, alt=180.0)
landing = Geodetic(lat=43.00093, lon=-78.78877, alt=180.0)

pad_ecef = geodetic_to_ecef(pad)
print(f"pad ECEF: ({pad_ecef.x:.1f}, {pad_ecef.y:.1f}, {pad_ecef.z:.1f}) m")

# The inverse conversion recovers the geodetic point to sub-millimetre.
back = ecef_to_geodetic(pad_ecef)
print(f"round trip error: lat {abs(back.lat - pad.lat):.2e} deg, "
      f"alt {abs(back.alt - pad.alt):.2e} m")

# Local frame about the pad: the landing spot in metres east/north/up.
landing_enu = geodetic_to_enu(landing, pad)
print(f"landing in pad frame: e={landing_enu.e:.2f} m, "
      f"n={landing_enu.n:.2f} m, u={landing_enu.u:.2f} m")

# A toy trajectory flown toward the landing spot, drawn in the pad frame.
track = [Enu(landing_enu.e * s, landing_enu.n * s, 3.0)
         for s in (0.0, 0.25, 0.5, 0.75, 1.0)]

# Rotating about Up so the pad->landing bearing becomes +x makes courses
# from different days (or different sites) directly comparable.
aligned = align_to_east(track, landing_enu)
print("aligned track (x = along course, y = lateral):")
for point in aligned:
    print(f"  x={point.e:7.2f}  y={point.n:7.3f}  z={point.u:4.1f}")

# Alignment is an isometry: the course length is untouched.
length = math.hypot(landing_enu.e, landing_enu.n)
assert abs(aligned[-1].e - length) < 1e-9
assert abs(aligned[-1].n) < 1e-9
print(f"course length preserved: {length:.3f} m")
