"""Voronoi diagram as the dual of a Delaunay triangulation.

Cells are assembled from the circumcenters of the triangles around each
site; hull sites get two outward rays (perpendicular to their hull edges)
truncated far outside the clip box.  Every cell is then clipped to the
requested bounding rectangle, so unbounded cells come back as finite
polygons.  Cell adjacency pairs are the triangulation edges whose dual
Voronoi edge has positive length (for sites in general position that is
exactly the Delaunay edge set).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from .geometry import UM_PER_M, Point, _circumcenter_um
from .delaunay import GHOST, Triangulation, TriangulationError

Rect = Tuple[float, float, float, float]   # (xmin, ymin, xmax, ymax)


@dataclass
class VoronoiDiagram:
    sites: Dict[int, Point]
    cells: Dict[int, List[Tuple[float, float]]] = field(default_factory=dict)
    adjacency: Set[Tuple[int, int]] = field(default_factory=set)


def voronoi_dual(t: Triangulation, bbox: Rect) -> VoronoiDiagram:
    """Voronoi cells of the triangulation's sites, clipped to ``bbox``.

    Raises TriangulationError for degenerate input (collinear sites or a
    single site); exactly two sites are handled as the perpendicular
    bisector special case.
    """
    sites = t.points()
    if len(sites) == 2:
        return _two_site_diagram(sites, bbox)
    if t.degenerate:
        raise TriangulationError(
            "voronoi dual requires >= 3 non-collinear sites (or exactly 2)")

    centers: Dict[int, Tuple[float, float]] = {}       # triangle -> center
    centers_exact: Dict[int, tuple] = {}
    tv, tn = t._tv, t._tn
    px, py = t._px, t._py

    diagram = VoronoiDiagram(sites=sites)
    ext = t._ext

    def center_of(tri: int) -> Tuple[float, float]:
        c = centers.get(tri)
        if c is None:
            a, b, cc = tv[tri]
            cx, cy = _circumcenter_um(px[a], py[a], px[b], py[b],
                                      px[cc], py[cc])
            centers_exact[tri] = (cx, cy)
            c = (float(cx), float(cy))
            centers[tri] = c
        return c

    for ext_id, vi in t._int.items():
        diagram.cells[ext_id] = _cell_polygon(t, vi, center_of, bbox)

    # adjacency: Delaunay edges whose dual edge is non-degenerate
    seen = set()
    for tri in t._alive_tris():
        if tv[tri][2] == GHOST:
            continue
        center_of(tri)
        for i in range(3):
            n = tn[tri][i]
            u = tv[tri][(i + 1) % 3]
            v = tv[tri][(i + 2) % 3]
            key = (u, v) if u < v else (v, u)
            if key in seen:
                continue
            seen.add(key)
            if tv[n][2] == GHOST:
                positive = True          # hull edge: dual is a ray
            else:
                center_of(n)
                positive = centers_exact[tri] != centers_exact[n]
            if positive:
                eu, ev = ext[u], ext[v]
                diagram.adjacency.add((eu, ev) if eu < ev else (ev, eu))
    return diagram


def _cell_polygon(t: Triangulation, vi: int, center_of, bbox: Rect
                  ) -> List[Tuple[float, float]]:
    tv = t._tv
    px, py = t._px, t._py
    ring, tris = t._star_ring(vi)

    if GHOST not in ring:
        poly = [(x / UM_PER_M, y / UM_PER_M) for x, y in
                (center_of(tri) for tri in tris)]
        return _clip_to_box(_dedupe(poly), bbox)

    # hull site: real triangle fan plus two outward rays;
    # rotate the triangle list so it starts right after the ghost gap
    k = ring.index(GHOST)
    # tris[k-1] and tris[k] are the two ghosts around the gap
    order = [tris[(k + 1 + j) % len(tris)] for j in range(len(tris) - 2)]
    fan = [tri for tri in order if tv[tri][2] != GHOST]
    pts = [center_of(tri) for tri in fan]

    # outgoing hull edge (vi -> first ring vertex after the gap) and
    # incoming hull edge (last ring vertex before the gap -> vi)
    first = ring[(k + 1) % len(ring)]
    last = ring[(k - 1) % len(ring)]
    d_out = _ray_dir(px[vi], py[vi], px[first], py[first])
    d_in = _ray_dir(px[last], py[last], px[vi], py[vi])

    span = math.hypot(bbox[2] - bbox[0], bbox[3] - bbox[1]) * UM_PER_M
    reach = 4.0 * (span + max(
        (math.hypot(x - px[vi], y - py[vi]) for x, y in pts), default=0.0))
    start = (pts[0][0] + d_out[0] * reach, pts[0][1] + d_out[1] * reach)
    end = (pts[-1][0] + d_in[0] * reach, pts[-1][1] + d_in[1] * reach)
    poly = [start] + pts + [end]
    poly = [(x / UM_PER_M, y / UM_PER_M) for x, y in poly]
    return _clip_to_box(_dedupe(poly), bbox)


def _ray_dir(ax: int, ay: int, bx: int, by: int) -> Tuple[float, float]:
    """Unit outward normal of hull edge a->b (hull interior on its left)."""
    dx = float(bx - ax)
    dy = float(by - ay)
    n = math.hypot(dx, dy)
    return (dy / n, -dx / n)


def _dedupe(poly: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
    out = []
    for p in poly:
        if not out or out[-1] != p:
            out.append(p)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def _clip_to_box(poly: List[Tuple[float, float]], bbox: Rect
                 ) -> List[Tuple[float, float]]:
    """Sutherland-Hodgman clip of a convex polygon to a rectangle."""
    xmin, ymin, xmax, ymax = bbox
    planes = (
        lambda p: p[0] - xmin,      # keep x >= xmin
        lambda p: xmax - p[0],
        lambda p: p[1] - ymin,
        lambda p: ymax - p[1],
    )
    out = poly
    for side in planes:
        if not out:
            return []
        nxt: List[Tuple[float, float]] = []
        n = len(out)
        for i in range(n):
            cur = out[i]
            prv = out[i - 1]
            dc = side(cur)
            dp = side(prv)
            if dp >= 0:
                if dc >= 0:
                    nxt.append(cur)
                else:
                    nxt.append(_lerp(prv, cur, dp / (dp - dc)))
            elif dc >= 0:
                nxt.append(_lerp(prv, cur, dp / (dp - dc)))
                nxt.append(cur)
        out = _dedupe(nxt)
    return out


def _lerp(a, b, t: float) -> Tuple[float, float]:
    return (a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t)


def _two_site_diagram(sites: Dict[int, Point], bbox: Rect) -> VoronoiDiagram:
    (ia, pa), (ib, pb) = sorted(sites.items())
    diagram = VoronoiDiagram(sites=dict(sites))
    diagram.adjacency.add((ia, ib))
    box = [(bbox[0], bbox[1]), (bbox[2], bbox[1]),
           (bbox[2], bbox[3]), (bbox[0], bbox[3])]
    for me, other, key in ((pa, pb, ia), (pb, pa, ib)):
        # keep the half plane closer to `me`: (other-me) . (x - mid) <= 0
        mx = (me.x + other.x) / 2.0
        my = (me.y + other.y) / 2.0
        dx = other.x - me.x
        dy = other.y - me.y
        cell = _halfplane_clip(box, lambda p: -(dx * (p[0] - mx)
                                                + dy * (p[1] - my)))
        diagram.cells[key] = cell
    return diagram


def _halfplane_clip(poly, side) -> List[Tuple[float, float]]:
    out: List[Tuple[float, float]] = []
    n = len(poly)
    for i in range(n):
        cur = poly[i]
        prv = poly[i - 1]
        dc = side(cur)
        dp = side(prv)
        if dp >= 0:
            if dc >= 0:
                out.append(cur)
            else:
                out.append(_lerp(prv, cur, dp / (dp - dc)))
        elif dc >= 0:
            out.append(_lerp(prv, cur, dp / (dp - dc)))
            out.append(cur)
    return _dedupe(out)
