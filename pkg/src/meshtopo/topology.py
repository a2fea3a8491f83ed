"""Node sets and undirected link graphs over them.

A Topology is the object every metric, pruning pass, and simulation run
acts on: identified points plus a set of undirected links with a per-node
incidence index.  Completed topologies are treated as immutable snapshots;
anything that rewrites links should work on a copy().
"""

from __future__ import annotations

import math
from collections import deque
from typing import Dict, Iterable, Iterator, Optional, Set, Tuple

from .geometry import UM_PER_M, GeometryError, Point, dist, dist2_um

Link = Tuple[int, int]


def normalize_link(u: int, v: int) -> Link:
    if u == v:
        raise ValueError(f"self-loop at node {u}")
    return (u, v) if u < v else (v, u)


class NodeSet:
    """Identified 2-D points.  Duplicate coordinates are a data error."""

    def __init__(self, points: Dict[int, Point] | Iterable[Tuple[int, Point]]):
        items = points.items() if isinstance(points, dict) else points
        self._points: Dict[int, Point] = {}
        seen: Dict[Tuple[int, int], int] = {}
        for nid, p in items:
            if not isinstance(nid, int):
                raise ValueError(f"node id must be an int, got {nid!r}")
            if nid in self._points:
                raise ValueError(f"duplicate node id {nid}")
            key = (p.ux, p.uy)
            if key in seen:
                raise GeometryError(
                    f"nodes {seen[key]} and {nid} share coordinates "
                    f"({p.x}, {p.y})")
            seen[key] = nid
            self._points[nid] = p

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self) -> Iterator[int]:
        return iter(self._points)

    def __contains__(self, nid: int) -> bool:
        return nid in self._points

    def __getitem__(self, nid: int) -> Point:
        return self._points[nid]

    def ids(self) -> list:
        return sorted(self._points)

    def items(self):
        return self._points.items()

    def as_dict(self) -> Dict[int, Point]:
        return dict(self._points)


class Topology:
    """Undirected link graph over a NodeSet.

    ``fixed_range_m`` overrides the longest-incident-link transmission
    range with a constant (used by the full-range baseline network).
    """

    def __init__(self, nodes: NodeSet, links: Iterable[Link] = (),
                 fixed_range_m: Optional[float] = None,
                 area: Optional[Tuple[float, float]] = None):
        self.nodes = nodes
        self.fixed_range_m = fixed_range_m
        self.area = area
        self.links: Set[Link] = set()
        self._nbrs: Dict[int, Set[int]] = {nid: set() for nid in nodes}
        for u, v in links:
            self.add_link(u, v)

    # -- mutation ---------------------------------------------------------

    def add_link(self, u: int, v: int) -> None:
        e = normalize_link(u, v)
        if e[0] not in self.nodes or e[1] not in self.nodes:
            raise ValueError(f"link {e} references an unknown node")
        if e in self.links:
            return
        self.links.add(e)
        self._nbrs[e[0]].add(e[1])
        self._nbrs[e[1]].add(e[0])

    def remove_link(self, u: int, v: int) -> None:
        e = normalize_link(u, v)
        self.links.remove(e)
        self._nbrs[e[0]].discard(e[1])
        self._nbrs[e[1]].discard(e[0])

    # -- queries ----------------------------------------------------------

    def __contains__(self, link: Link) -> bool:
        return normalize_link(*link) in self.links

    def n_nodes(self) -> int:
        return len(self.nodes)

    def neighbors(self, u: int) -> Set[int]:
        return self._nbrs[u]

    def degree(self, u: int) -> int:
        return len(self._nbrs[u])

    def link_length_m(self, link: Link) -> float:
        u, v = link
        return dist(self.nodes[u], self.nodes[v])

    def link_length2_um(self, link: Link) -> int:
        u, v = link
        return dist2_um(self.nodes[u], self.nodes[v])

    def copy(self) -> "Topology":
        return Topology(self.nodes, self.links,
                        fixed_range_m=self.fixed_range_m, area=self.area)

    def connected_components(self) -> list:
        seen: Set[int] = set()
        comps = []
        for start in self.nodes:
            if start in seen:
                continue
            comp = {start}
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for w in self._nbrs[u]:
                    if w not in comp:
                        comp.add(w)
                        queue.append(w)
            seen |= comp
            comps.append(comp)
        return comps

    def is_connected(self) -> bool:
        return len(self.connected_components()) <= 1

    def has_alternative_path(self, u: int, v: int) -> bool:
        """True if u reaches v without using the direct link (u, v)."""
        e = normalize_link(u, v)
        seen = {u}
        queue = deque([u])
        while queue:
            w = queue.popleft()
            for x in self._nbrs[w]:
                if w == e[0] and x == e[1] or w == e[1] and x == e[0]:
                    continue
                if x == v:
                    return True
                if x not in seen:
                    seen.add(x)
                    queue.append(x)
        return False


class NodeGrid:
    """Uniform spatial hash for exact circular range queries."""

    def __init__(self, points: Dict[int, Point], cell_um: Optional[int] = None):
        self._points = points
        if cell_um is None:
            if points:
                xs = [p.ux for p in points.values()]
                ys = [p.uy for p in points.values()]
                span = max(max(xs) - min(xs), max(ys) - min(ys), 1)
                cell_um = max(1, int(span / math.sqrt(len(points)) ) )
            else:
                cell_um = 1
        self.cell_um = cell_um
        self._cells: Dict[Tuple[int, int], list] = {}
        for nid, p in points.items():
            self._cells.setdefault(
                (p.ux // cell_um, p.uy // cell_um), []).append(nid)

    def within2(self, center: Point, r2: int) -> Iterator[int]:
        """Yield node ids at exact squared distance <= r2 (square um)."""
        if r2 < 0:
            return
        radius_um = math.isqrt(r2) + 1
        cu = self.cell_um
        gx0 = (center.ux - radius_um) // cu
        gx1 = (center.ux + radius_um) // cu
        gy0 = (center.uy - radius_um) // cu
        gy1 = (center.uy + radius_um) // cu
        pts = self._points
        for gx in range(gx0, gx1 + 1):
            for gy in range(gy0, gy1 + 1):
                for nid in self._cells.get((gx, gy), ()):
                    p = pts[nid]
                    dx = p.ux - center.ux
                    dy = p.uy - center.uy
                    if dx * dx + dy * dy <= r2:
                        yield nid


def disk_graph(nodes: NodeSet, radius_m: float,
               fixed_range: bool = True,
               area: Optional[Tuple[float, float]] = None) -> Topology:
    """Link every pair of nodes within ``radius_m`` of each other."""
    radius_um = round(radius_m * UM_PER_M)
    r2 = radius_um * radius_um
    grid = NodeGrid(nodes.as_dict())
    topo = Topology(nodes, fixed_range_m=radius_m if fixed_range else None,
                    area=area)
    for u in nodes:
        pu = nodes[u]
        for v in grid.within2(pu, r2):
            if v > u:
                topo.add_link(u, v)
    return topo
