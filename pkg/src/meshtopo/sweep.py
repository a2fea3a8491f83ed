"""Sweep-line detection of all proper pairwise crossings among segments.

The sweep runs top to bottom: event points are ordered by descending y,
then ascending x, so a horizontal segment's left endpoint acts as its
upper end.  Event coordinates are kept exact (integers, or rationals for
crossing points) so that queue ordering never depends on rounding; points
are converted to floats only in the returned report.

Collinear overlapping segments have no single crossing point; they are
reported in a separate diagnostics list, found by grouping segments per
supporting line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from heapq import heappush, heappop
from typing import Dict, List, Optional, Sequence, Tuple

from .geometry import UM_PER_M, Segment
from .topology import Link, Topology


@dataclass
class CrossingSet:
    """Proper pairwise crossings (pair -> point in meters) plus overlap pairs."""

    crossings: Dict[Link, Tuple[float, float]] = field(default_factory=dict)
    overlaps: List[Link] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.crossings)

    def pairs(self) -> set:
        return set(self.crossings)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


# Segments are stored as (x1, y1, x2, y2) with the upper endpoint first.


def _cmp_seg_point(seg, px, py) -> int:
    """Sign of (segment's x at sweep height py) - px, exact."""
    x1, y1, x2, y2 = seg
    if y1 == y2:
        # Horizontal: present in the status only while the sweep is at its
        # own height; its effective key clamps to the query point.
        if px < x1:
            return 1
        if px > x2:
            return -1
        return 0
    d = y1 - y2
    lhs = x1 * d + (x2 - x1) * (y1 - py)
    rhs = px * d
    if lhs > rhs:
        return 1
    if lhs < rhs:
        return -1
    return 0


def _bis_left(status: List[int], segs, px, py) -> int:
    lo, hi = 0, len(status)
    while lo < hi:
        mid = (lo + hi) // 2
        if _cmp_seg_point(segs[status[mid]], px, py) < 0:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _bis_right(status: List[int], segs, px, py) -> int:
    lo, hi = 0, len(status)
    while lo < hi:
        mid = (lo + hi) // 2
        if _cmp_seg_point(segs[status[mid]], px, py) <= 0:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _proper_crossing_exact(sa, sb) -> Optional[Tuple[Fraction, Fraction]]:
    """Exact interior crossing point of two segments, or None."""
    ax, ay, bx, by = sa
    cx, cy, dx, dy = sb
    r_x, r_y = bx - ax, by - ay
    s_x, s_y = dx - cx, dy - cy
    den = r_x * s_y - r_y * s_x
    if den == 0:
        return None
    o1 = _sign(r_x * (cy - ay) - r_y * (cx - ax))
    o2 = _sign(r_x * (dy - ay) - r_y * (dx - ax))
    if o1 == 0 or o2 == 0 or o1 == o2:
        return None
    o3 = _sign(s_x * (ay - cy) - s_y * (ax - cx))
    o4 = _sign(s_x * (by - cy) - s_y * (bx - cx))
    if o3 == 0 or o4 == 0 or o3 == o4:
        return None
    t = Fraction((cx - ax) * s_y - (cy - ay) * s_x, den)
    return (ax + t * r_x, ay + t * r_y)


def find_crossings(segments: Sequence[Segment]) -> CrossingSet:
    """All proper pairwise crossings among ``segments``.

    Expected O((n + I) log n) for n segments with I crossings.  Every
    unordered pair appears at most once; each reported point is the exact
    crossing converted to float meters.
    """
    segs = []
    for s in segments:
        a = (s.a.ux, s.a.uy)
        b = (s.b.ux, s.b.uy)
        # Upper endpoint first: larger y, then smaller x.
        if (b[1], -b[0]) > (a[1], -a[0]):
            a, b = b, a
        segs.append((a[0], a[1], b[0], b[1]))

    result = CrossingSet(overlaps=_collinear_overlaps(segs))
    if not segs:
        return result

    heap: list = []
    pushed = set()
    pending_upper: Dict[tuple, List[int]] = {}

    def push_point(px, py) -> None:
        key = (px, py)
        if key not in pushed:
            pushed.add(key)
            heappush(heap, (-py, px, py))

    for sid, (x1, y1, x2, y2) in enumerate(segs):
        push_point(x1, y1)
        push_point(x2, y2)
        pending_upper.setdefault((x1, y1), []).append(sid)

    status: List[int] = []
    crossings: Dict[Link, Tuple[Fraction, Fraction]] = {}

    def below_cmp(i: int, j: int) -> int:
        # Order of segments through the event point just below it: by the
        # direction of their downward halves, horizontals last, ties by id.
        xi1, yi1, xi2, yi2 = segs[i]
        xj1, yj1, xj2, yj2 = segs[j]
        dxi, dyi = xi2 - xi1, yi2 - yi1
        dxj, dyj = xj2 - xj1, yj2 - yj1
        if dyi == 0 and dyj == 0:
            return i - j
        if dyi == 0:
            return 1
        if dyj == 0:
            return -1
        cross = dxi * dyj - dyi * dxj
        if cross > 0:
            return -1
        if cross < 0:
            return 1
        return i - j

    def schedule(i: int, j: int, px, py) -> None:
        q = _proper_crossing_exact(segs[i], segs[j])
        if q is None:
            return
        qx, qy = q
        if qy < py or (qy == py and qx > px):
            push_point(qx, qy)

    while heap:
        _, px, py = heappop(heap)
        upper = pending_upper.pop((px, py), [])

        lo = _bis_left(status, segs, px, py)
        hi = _bis_right(status, segs, px, py)
        run = status[lo:hi]
        through = [s for s in run if (segs[s][2], segs[s][3]) != (px, py)]

        if len(through) >= 2:
            for ii in range(len(through)):
                si = through[ii]
                xi1, yi1, xi2, yi2 = segs[si]
                for sj in through[ii + 1:]:
                    xj1, yj1, xj2, yj2 = segs[sj]
                    # Both interiors pass through the event point, so the
                    # pair crosses properly unless the segments are parallel
                    # (then they are collinear overlaps, handled elsewhere).
                    if (xi2 - xi1) * (yj2 - yj1) != (yi2 - yi1) * (xj2 - xj1):
                        pair = (si, sj) if si < sj else (sj, si)
                        crossings[pair] = (px, py)

        del status[lo:hi]
        block = sorted(through + upper, key=cmp_to_key(below_cmp))
        status[lo:lo] = block

        if block:
            if lo > 0:
                schedule(status[lo - 1], status[lo], px, py)
            r = lo + len(block)
            if r < len(status):
                schedule(status[r - 1], status[r], px, py)
        elif 0 < lo < len(status):
            schedule(status[lo - 1], status[lo], px, py)

    result.crossings = {
        pair: (float(qx) / UM_PER_M, float(qy) / UM_PER_M)
        for pair, (qx, qy) in crossings.items()
    }
    return result


def _collinear_overlaps(segs) -> List[Link]:
    """Pairs of collinear segments sharing a positive-length stretch."""
    lines: Dict[tuple, list] = {}
    for sid, (x1, y1, x2, y2) in enumerate(segs):
        dx, dy = x2 - x1, y2 - y1
        g = math.gcd(abs(dx), abs(dy))
        ndx, ndy = dx // g, dy // g
        if ndx < 0 or (ndx == 0 and ndy < 0):
            ndx, ndy = -ndx, -ndy
        c = ndx * y1 - ndy * x1
        t1 = ndx * x1 + ndy * y1
        t2 = ndx * x2 + ndy * y2
        lines.setdefault((ndx, ndy, c), []).append(
            (min(t1, t2), max(t1, t2), sid))

    out: List[Link] = []
    for intervals in lines.values():
        if len(intervals) < 2:
            continue
        intervals.sort()
        active: List[Tuple[int, int]] = []  # (t_hi, sid)
        for t_lo, t_hi, sid in intervals:
            active = [(h, s) for h, s in active if h > t_lo]
            for _, other in active:
                out.append((other, sid) if other < sid else (sid, other))
            active.append((t_hi, sid))
    out.sort()
    return out


def topology_segments(topo: Topology) -> Tuple[List[Segment], List[Link]]:
    """Segments for a topology's links, plus the link keys in segment order."""
    links = sorted(topo.links)
    segments = [Segment(topo.nodes[u], topo.nodes[v]) for u, v in links]
    return segments, links


def count_crossings(topo: Topology) -> int:
    """Number of proper pairwise crossings among a topology's links."""
    segments, _ = topology_segments(topo)
    return len(find_crossings(segments))
