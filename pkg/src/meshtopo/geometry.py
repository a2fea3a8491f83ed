"""Exact 2-D geometric primitives on an integer-micrometer grid.

Coordinates enter in meters and are snapped to integer micrometers, after
which every orientation / circumcircle / intersection predicate is decided
in exact integer (or rational) arithmetic.  Floating point appears only in
reported coordinates and lengths, never in a sign decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Tuple

UM_PER_M = 1_000_000


class GeometryError(ValueError):
    """Degenerate geometric input (duplicate points, collinear circle, ...)."""


def snap_um(meters: float) -> int:
    """Snap a coordinate given in meters to the integer micrometer grid."""
    if not math.isfinite(meters):
        raise GeometryError(f"coordinate is not finite: {meters!r}")
    return round(meters * UM_PER_M)


@dataclass(frozen=True, slots=True)
class Point:
    """A grid point; ``ux`` / ``uy`` are integer micrometers."""

    ux: int
    uy: int

    @staticmethod
    def from_meters(x: float, y: float) -> "Point":
        return Point(snap_um(x), snap_um(y))

    @property
    def x(self) -> float:
        """Meters."""
        return self.ux / UM_PER_M

    @property
    def y(self) -> float:
        """Meters."""
        return self.uy / UM_PER_M

    def meters(self) -> Tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise GeometryError(f"zero-length segment at {self.a}")


class Orientation(Enum):
    CCW = 1
    COLLINEAR = 0
    CW = -1


class CirclePosition(Enum):
    INSIDE = 1
    COCIRCULAR = 0
    OUTSIDE = -1


class SegmentRelation(Enum):
    PROPER = "proper"
    ENDPOINT_TOUCH = "endpoint_touch"
    OVERLAP = "overlap"
    NONE = "none"


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _orient(ax: int, ay: int, bx: int, by: int, cx: int, cy: int) -> int:
    """Sign of twice the signed area of triangle abc (exact)."""
    return _sign((bx - ax) * (cy - ay) - (by - ay) * (cx - ax))


# Relative error bound for the float prefilter of the incircle determinant:
# a permanent bound (sum of magnitudes of every monomial) scaled by a very
# conservative epsilon.  Whenever |det| falls below it, the sign is decided
# by exact big-integer evaluation instead.
_INCIRCLE_FILTER_EPS = 1e-10


def _incircle(ax: int, ay: int, bx: int, by: int,
              cx: int, cy: int, dx: int, dy: int) -> int:
    """Sign > 0 iff d lies strictly inside the circumcircle of CCW (a,b,c)."""
    adx = ax - dx
    ady = ay - dy
    bdx = bx - dx
    bdy = by - dy
    cdx = cx - dx
    cdy = cy - dy

    fadx = float(adx)
    fady = float(ady)
    fbdx = float(bdx)
    fbdy = float(bdy)
    fcdx = float(cdx)
    fcdy = float(cdy)
    fad = fadx * fadx + fady * fady
    fbd = fbdx * fbdx + fbdy * fbdy
    fcd = fcdx * fcdx + fcdy * fcdy
    det = (fadx * (fbdy * fcd - fcdy * fbd)
           - fady * (fbdx * fcd - fcdx * fbd)
           + fad * (fbdx * fcdy - fcdx * fbdy))
    permanent = (abs(fadx) * (abs(fbdy) * fcd + abs(fcdy) * fbd)
                 + abs(fady) * (abs(fbdx) * fcd + abs(fcdx) * fbd)
                 + fad * (abs(fbdx * fcdy) + abs(fcdx * fbdy)))
    bound = _INCIRCLE_FILTER_EPS * permanent
    if det > bound:
        return 1
    if det < -bound:
        return -1

    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    exact = (adx * (bdy * cd - cdy * bd)
             - ady * (bdx * cd - cdx * bd)
             + ad * (bdx * cdy - cdx * bdy))
    return _sign(exact)


def orient2d(a: Point, b: Point, c: Point) -> Orientation:
    """Orientation of the ordered triple (a, b, c), exact."""
    return Orientation(_orient(a.ux, a.uy, b.ux, b.uy, c.ux, c.uy))


def in_circle(a: Point, b: Point, c: Point, d: Point) -> CirclePosition:
    """Position of d relative to the circumcircle of a, b, c (exact).

    The triple (a, b, c) is normalized to counterclockwise order first.
    Raises GeometryError if a, b, c are collinear (no circumcircle).
    """
    o = _orient(a.ux, a.uy, b.ux, b.uy, c.ux, c.uy)
    if o == 0:
        raise GeometryError("collinear points have no circumcircle")
    if o < 0:
        b, c = c, b
    return CirclePosition(
        _incircle(a.ux, a.uy, b.ux, b.uy, c.ux, c.uy, d.ux, d.uy))


def dist2_um(a: Point, b: Point) -> int:
    """Exact squared distance in square micrometers."""
    dx = a.ux - b.ux
    dy = a.uy - b.uy
    return dx * dx + dy * dy


def dist(a: Point, b: Point) -> float:
    """Euclidean distance in meters."""
    return math.hypot(a.ux - b.ux, a.uy - b.uy) / UM_PER_M


def circumcenter(a: Point, b: Point, c: Point) -> Tuple[Fraction, Fraction]:
    """Circumcenter of a, b, c in meters, as exact rationals (not snapped)."""
    ux, uy = _circumcenter_um(a.ux, a.uy, b.ux, b.uy, c.ux, c.uy)
    return (ux / UM_PER_M, uy / UM_PER_M)


def _circumcenter_um(ax: int, ay: int, bx: int, by: int,
                     cx: int, cy: int) -> Tuple[Fraction, Fraction]:
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0:
        raise GeometryError("collinear points have no circumcenter")
    asq = ax * ax + ay * ay
    bsq = bx * bx + by * by
    csq = cx * cx + cy * cy
    ux = asq * (by - cy) + bsq * (cy - ay) + csq * (ay - by)
    uy = asq * (cx - bx) + bsq * (ax - cx) + csq * (bx - ax)
    return (Fraction(ux, d), Fraction(uy, d))


def segment_intersection(
    s1: Segment, s2: Segment
) -> Tuple[SegmentRelation, Optional[Tuple[float, float]]]:
    """Classify how two segments meet.

    PROPER means the open interiors cross at exactly one point, which is
    returned (in meters).  A contact that involves an endpoint of either
    segment is ENDPOINT_TOUCH; collinear segments sharing more than one
    point are OVERLAP (no single point to return).
    """
    rel, pt = _segment_intersection_exact(s1, s2)
    if pt is None:
        return rel, None
    return rel, (float(pt[0]) / UM_PER_M, float(pt[1]) / UM_PER_M)


def _segment_intersection_exact(
    s1: Segment, s2: Segment
) -> Tuple[SegmentRelation, Optional[Tuple[Fraction, Fraction]]]:
    """Exact classification; the returned point is in rational micrometers."""
    ax, ay = s1.a.ux, s1.a.uy
    bx, by = s1.b.ux, s1.b.uy
    cx, cy = s2.a.ux, s2.a.uy
    dx, dy = s2.b.ux, s2.b.uy

    o1 = _orient(ax, ay, bx, by, cx, cy)
    o2 = _orient(ax, ay, bx, by, dx, dy)
    o3 = _orient(cx, cy, dx, dy, ax, ay)
    o4 = _orient(cx, cy, dx, dy, bx, by)

    if o1 != o2 and o3 != o4 and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        # Interiors cross; solve for the crossing point.
        r_x, r_y = bx - ax, by - ay
        s_x, s_y = dx - cx, dy - cy
        den = r_x * s_y - r_y * s_x
        num = (cx - ax) * s_y - (cy - ay) * s_x
        t = Fraction(num, den)
        return SegmentRelation.PROPER, (ax + t * r_x, ay + t * r_y)

    if o1 == 0 and o2 == 0:
        # Collinear: project on the dominant axis of s1's direction.
        if abs(bx - ax) >= abs(by - ay):
            p1, q1 = sorted((ax, bx))
            p2, q2 = sorted((cx, dx))
        else:
            p1, q1 = sorted((ay, by))
            p2, q2 = sorted((cy, dy))
        lo, hi = max(p1, p2), min(q1, q2)
        if lo > hi:
            return SegmentRelation.NONE, None
        if lo == hi:
            # Single shared point; it is an endpoint of both segments.
            for p in ((ax, ay), (bx, by)):
                if p in ((cx, cy), (dx, dy)):
                    return SegmentRelation.ENDPOINT_TOUCH, (
                        Fraction(p[0]), Fraction(p[1]))
            return SegmentRelation.ENDPOINT_TOUCH, None  # pragma: no cover
        return SegmentRelation.OVERLAP, None

    # Not collinear, not a proper crossing: the only possible contact is an
    # endpoint of one segment lying on the other.
    if o1 == 0 and _between(cx, cy, ax, ay, bx, by):
        return SegmentRelation.ENDPOINT_TOUCH, (Fraction(cx), Fraction(cy))
    if o2 == 0 and _between(dx, dy, ax, ay, bx, by):
        return SegmentRelation.ENDPOINT_TOUCH, (Fraction(dx), Fraction(dy))
    if o3 == 0 and _between(ax, ay, cx, cy, dx, dy):
        return SegmentRelation.ENDPOINT_TOUCH, (Fraction(ax), Fraction(ay))
    if o4 == 0 and _between(bx, by, cx, cy, dx, dy):
        return SegmentRelation.ENDPOINT_TOUCH, (Fraction(bx), Fraction(by))
    return SegmentRelation.NONE, None


def _between(px: int, py: int, ax: int, ay: int, bx: int, by: int) -> bool:
    """True if (px,py), known collinear with a-b, lies on the closed segment."""
    return (min(ax, bx) <= px <= max(ax, bx)
            and min(ay, by) <= py <= max(ay, by))
