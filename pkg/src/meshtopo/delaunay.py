"""Incremental Delaunay triangulation with exact predicates.

Structure conventions:

- Real triangles are stored counterclockwise.
- Hull edges are marked by ghost triangles: the hull edge u -> v (interior
  on its left) is stored as the triple (v, u, GHOST), with GHOST always at
  local index 2.  Ghosts form a circular list around the hull through their
  shared (vertex, GHOST) edges.
- Neighbor slot i of a triangle is the triangle across the edge opposite
  vertex i.
- Fewer than 3 vertices, or all vertices collinear, is a documented
  degenerate mode: no triangles; the link graph is the path along the
  sorted collinear order.

Vertices carry external integer ids; internally they are remapped to dense
indices so the hot loops run on plain lists.
"""

from __future__ import annotations

import random
from typing import Dict, Iterable, List, Optional, Set, Tuple

from .geometry import GeometryError, Point, _incircle, _orient
from .topology import NodeSet, Topology

GHOST = -1


class TriangulationError(ValueError):
    """Structural misuse of a triangulation (boundary flip, unknown id, ...)."""


class Triangulation:
    """Triangle mesh with adjacency, point location, flips, insert, delete."""

    def __init__(self) -> None:
        # vertices
        self._px: List[Optional[int]] = []
        self._py: List[Optional[int]] = []
        self._ext: List[int] = []            # internal -> external id
        self._int: Dict[int, int] = {}       # external -> internal
        self._coord: Dict[Tuple[int, int], int] = {}
        self._vfree: List[int] = []
        self._order: List[int] = []          # arrival order (internal ids)
        # triangles
        self._tv: List[List[int]] = []
        self._tn: List[List[int]] = []
        self._tfree: List[int] = []
        self._vtri: List[Optional[int]] = []
        self._n_real = 0
        # point-location hint grid: cell -> some internal vertex id
        self._grid: Dict[Tuple[int, int], int] = {}
        self._grid_cell = 0

    # ------------------------------------------------------------------
    # basic queries

    def __len__(self) -> int:
        return len(self._int)

    @property
    def degenerate(self) -> bool:
        """True while the vertex set spans no area (all collinear or < 3)."""
        return self._n_real == 0

    def node_ids(self) -> List[int]:
        return sorted(self._int)

    def point(self, node_id: int) -> Point:
        vi = self._require(node_id)
        return Point(self._px[vi], self._py[vi])

    def points(self) -> Dict[int, Point]:
        return {ext: Point(self._px[vi], self._py[vi])
                for ext, vi in self._int.items()}

    def _require(self, node_id: int) -> int:
        try:
            return self._int[node_id]
        except KeyError:
            raise TriangulationError(f"unknown node id {node_id}") from None

    def _is_ghost(self, t: int) -> bool:
        return self._tv[t][2] == GHOST

    def triangles(self) -> List[Tuple[int, int, int]]:
        """Alive real triangles as CCW external-id triples, canonical order."""
        out = []
        for t in self._alive_tris():
            if self._is_ghost(t):
                continue
            a, b, c = (self._ext[v] for v in self._tv[t])
            # rotate so the smallest id leads; rotation keeps CCW order
            if b < a and b < c:
                a, b, c = b, c, a
            elif c < a and c < b:
                a, b, c = c, a, b
            out.append((a, b, c))
        out.sort()
        return out

    def edges(self) -> Set[Tuple[int, int]]:
        """Undirected edges as sorted external-id pairs.

        In degenerate mode this is the path along the sorted collinear order.
        """
        if self._n_real == 0:
            chain = self._collinear_chain()
            return {tuple(sorted(p)) for p in zip(chain, chain[1:])}
        out: Set[Tuple[int, int]] = set()
        for t in self._alive_tris():
            if self._is_ghost(t):
                continue
            a, b, c = self._tv[t]
            ea, eb, ec = self._ext[a], self._ext[b], self._ext[c]
            out.add((ea, eb) if ea < eb else (eb, ea))
            out.add((eb, ec) if eb < ec else (ec, eb))
            out.add((ec, ea) if ec < ea else (ea, ec))
        return out

    def _collinear_chain(self) -> List[int]:
        live = [(self._px[vi], self._py[vi], self._ext[vi])
                for vi in self._int.values()]
        live.sort()
        return [ext for _, _, ext in live]

    def _alive_tris(self) -> Iterable[int]:
        dead = set(self._tfree)
        return (t for t in range(len(self._tv)) if t not in dead)

    # ------------------------------------------------------------------
    # vertex bookkeeping

    def _new_vertex(self, node_id: int, ux: int, uy: int) -> int:
        if node_id in self._int:
            raise TriangulationError(f"duplicate node id {node_id}")
        if (ux, uy) in self._coord:
            other = self._ext[self._coord[(ux, uy)]]
            raise GeometryError(
                f"node {node_id} duplicates coordinates of node {other}")
        if self._vfree:
            vi = self._vfree.pop()
            self._px[vi] = ux
            self._py[vi] = uy
            self._ext[vi] = node_id
            self._vtri[vi] = None
        else:
            vi = len(self._px)
            self._px.append(ux)
            self._py.append(uy)
            self._ext.append(node_id)
            self._vtri.append(None)
        self._int[node_id] = vi
        self._coord[(ux, uy)] = vi
        self._order.append(vi)
        return vi

    def _grid_register(self, vi: int) -> None:
        # Only after the vertex is wired in: the hint grid must never point
        # at a vertex the locate walk cannot start from.
        if self._grid_cell:
            cell = (self._px[vi] // self._grid_cell,
                    self._py[vi] // self._grid_cell)
            self._grid[cell] = vi

    def _drop_vertex(self, vi: int) -> None:
        ux, uy = self._px[vi], self._py[vi]
        del self._int[self._ext[vi]]
        del self._coord[(ux, uy)]
        self._order.remove(vi)
        if self._grid_cell:
            cell = (ux // self._grid_cell, uy // self._grid_cell)
            if self._grid.get(cell) == vi:
                del self._grid[cell]
        self._px[vi] = None
        self._py[vi] = None
        self._vtri[vi] = None
        self._vfree.append(vi)

    def _new_tri(self, a: int, b: int, c: int) -> int:
        if self._tfree:
            t = self._tfree.pop()
            self._tv[t][0] = a
            self._tv[t][1] = b
            self._tv[t][2] = c
        else:
            t = len(self._tv)
            self._tv.append([a, b, c])
            self._tn.append([-1, -1, -1])
        if c != GHOST:
            self._n_real += 1
        return t

    def _free_tri(self, t: int) -> None:
        if self._tv[t][2] != GHOST:
            self._n_real -= 1
        self._tfree.append(t)

    def _set_neighbor(self, t: int, old: int, new: int) -> None:
        n = self._tn[t]
        n[n.index(old)] = new

    # ------------------------------------------------------------------
    # insertion

    def insert(self, p: Point, node_id: Optional[int] = None,
               self_check: bool = False) -> int:
        """Insert a point, restore the Delaunay property, return its id."""
        if node_id is None:
            node_id = max(self._int, default=-1) + 1
        vi = self._new_vertex(node_id, p.ux, p.uy)
        if self._n_real == 0:
            self._try_leave_degenerate()
        else:
            self._insert_vertex(vi)
            self._grid_register(vi)
        if self_check:
            self.validate(check_planarity=True)
        return node_id

    def _try_leave_degenerate(self) -> None:
        """Bootstrap the full structure once the points span an area."""
        if len(self._order) < 3:
            return
        a, b = self._order[0], self._order[1]
        px, py = self._px, self._py
        pivot = None
        for vi in self._order[2:]:
            if _orient(px[a], py[a], px[b], py[b], px[vi], py[vi]) != 0:
                pivot = vi
                break
        if pivot is None:
            return
        if not self._grid_cell:
            xs = [x for x in self._px if x is not None]
            ys = [y for y in self._py if y is not None]
            span = max(max(xs) - min(xs), max(ys) - min(ys), 1)
            self._grid_cell = max(
                1, int(span / max(1.0, len(self._order) ** 0.5)))
            self._grid = {}
        self._bootstrap(a, b, pivot)
        for v in (a, b, pivot):
            self._grid_register(v)
        for vi in self._order:
            if vi not in (a, b, pivot):
                self._insert_vertex(vi)
                self._grid_register(vi)

    def _bootstrap(self, a: int, b: int, c: int) -> None:
        px, py = self._px, self._py
        if _orient(px[a], py[a], px[b], py[b], px[c], py[c]) < 0:
            b, c = c, b
        t = self._new_tri(a, b, c)
        gab = self._new_tri(b, a, GHOST)
        gbc = self._new_tri(c, b, GHOST)
        gca = self._new_tri(a, c, GHOST)
        self._tn[t] = [gbc, gca, gab]
        self._tn[gab] = [gca, gbc, t]
        self._tn[gbc] = [gab, gca, t]
        self._tn[gca] = [gbc, gab, t]
        for v in (a, b, c):
            self._vtri[v] = t

    # -- point location -------------------------------------------------

    def _hint_start(self, ux: int, uy: int) -> int:
        """An alive triangle to start the walk from, via the hint grid."""
        vi = None
        if self._grid_cell and self._grid:
            cx, cy = ux // self._grid_cell, uy // self._grid_cell
            vi = self._grid.get((cx, cy))
            if vi is None or self._px[vi] is None:
                for r in range(1, 64):
                    best = None
                    for gx in range(cx - r, cx + r + 1):
                        for gy in (cy - r, cy + r):
                            w = self._grid.get((gx, gy))
                            if w is not None and self._px[w] is not None:
                                best = w
                                break
                        if best is not None:
                            break
                    if best is None:
                        for gy in range(cy - r + 1, cy + r):
                            for gx in (cx - r, cx + r):
                                w = self._grid.get((gx, gy))
                                if w is not None and self._px[w] is not None:
                                    best = w
                                    break
                            if best is not None:
                                break
                    if best is not None:
                        vi = best
                        break
        if vi is None or self._vtri[vi] is None:
            vi = next(iter(self._int.values()))
        t = self._vtri[vi]
        if self._is_ghost(t):
            t = self._tn[t][2]
        return t

    def _locate(self, ux: int, uy: int) -> Tuple[str, int, int]:
        """Walk to the triangle containing (ux, uy).

        Returns (kind, triangle, detail): kind 'in' (real triangle),
        'edge' (detail = slot of the opposite vertex), 'vertex'
        (detail = local index), or 'out' (triangle is the ghost whose hull
        edge the point is strictly beyond).
        """
        px, py, tv, tn = self._px, self._py, self._tv, self._tn
        t = self._hint_start(ux, uy)
        prev = -1
        for _ in range(4 * len(tv) + 16):
            a, b, c = tv[t]
            oa = _orient(px[a], py[a], px[b], py[b], ux, uy)  # edge (a,b)
            ob = _orient(px[b], py[b], px[c], py[c], ux, uy)  # edge (b,c)
            oc = _orient(px[c], py[c], px[a], py[a], ux, uy)  # edge (c,a)
            nxt = -1
            if oa < 0 and tn[t][2] != prev:
                nxt = tn[t][2]
            elif ob < 0 and tn[t][0] != prev:
                nxt = tn[t][0]
            elif oc < 0 and tn[t][1] != prev:
                nxt = tn[t][1]
            elif oa < 0:
                nxt = tn[t][2]
            elif ob < 0:
                nxt = tn[t][0]
            elif oc < 0:
                nxt = tn[t][1]
            if nxt >= 0:
                if self._tv[nxt][2] == GHOST:
                    return ("out", nxt, 0)
                prev, t = t, nxt
                continue
            zeros = (oa == 0) + (ob == 0) + (oc == 0)
            if zeros == 0:
                return ("in", t, 0)
            if zeros == 1:
                if oa == 0:
                    return ("edge", t, 2)
                if ob == 0:
                    return ("edge", t, 0)
                return ("edge", t, 1)
            # two zero orientations: exactly on a vertex
            if oa == 0 and oc == 0:
                return ("vertex", t, 0)
            if oa == 0 and ob == 0:
                return ("vertex", t, 1)
            return ("vertex", t, 2)
        raise TriangulationError("point location walk failed to terminate")

    # -- structural updates ----------------------------------------------

    def _insert_vertex(self, vi: int) -> None:
        kind, t, detail = self._locate(self._px[vi], self._py[vi])
        if kind == "vertex":
            raise GeometryError("duplicate point")  # pragma: no cover
        if kind == "in":
            self._split_interior(t, vi)
        elif kind == "edge":
            if self._tv[self._tn[t][detail]][2] == GHOST:
                self._split_hull_edge(t, detail, vi)
            else:
                self._split_internal_edge(t, detail, vi)
        else:
            self._insert_outside(t, vi)

    def _split_interior(self, t: int, v: int) -> None:
        tv, tn = self._tv, self._tn
        a, b, c = tv[t]
        n_bc, n_ca, n_ab = tn[t]
        t1 = self._new_tri(b, c, v)
        t2 = self._new_tri(c, a, v)
        tv[t][2] = v                       # t becomes (a, b, v)
        tn[t] = [t1, t2, n_ab]
        tn[t1] = [t2, t, n_bc]
        tn[t2] = [t, t1, n_ca]
        self._set_neighbor(n_bc, t, t1)
        self._set_neighbor(n_ca, t, t2)
        vt = self._vtri
        vt[v] = t
        vt[a] = t
        vt[b] = t1
        vt[c] = t1
        self._legalize([(t, 2), (t1, 2), (t2, 2)])

    def _split_internal_edge(self, t: int, k: int, p: int) -> None:
        tv, tn = self._tv, self._tn
        c = tv[t][k]
        u = tv[t][(k + 1) % 3]
        w = tv[t][(k + 2) % 3]
        n = tn[t][k]
        i_u = tv[n].index(u)
        i_w = tv[n].index(w)
        d = tv[n][3 - i_u - i_w]
        n_wc = tn[t][(k + 1) % 3]
        n_cu = tn[t][(k + 2) % 3]
        n_ud = tn[n][i_w]
        n_dw = tn[n][i_u]

        tv[t][:] = [u, p, c]          # T_a
        tv[n][:] = [p, u, d]          # T_c
        t_b = self._new_tri(p, w, c)
        t_d = self._new_tri(w, p, d)
        tn[t] = [t_b, n_cu, n]
        tn[n] = [n_ud, t_d, t]
        tn[t_b] = [n_wc, t, t_d]
        tn[t_d] = [n, n_dw, t_b]
        self._set_neighbor(n_wc, t, t_b)
        self._set_neighbor(n_dw, n, t_d)
        vt = self._vtri
        vt[p] = t
        vt[u] = t
        vt[w] = t_b
        vt[c] = t
        vt[d] = n
        self._legalize([(t, 1), (t_b, 0), (n, 0), (t_d, 1)])

    def _split_hull_edge(self, t: int, k: int, p: int) -> None:
        tv, tn = self._tv, self._tn
        c = tv[t][k]
        u = tv[t][(k + 1) % 3]
        w = tv[t][(k + 2) % 3]
        g = tn[t][k]
        n_wc = tn[t][(k + 1) % 3]
        n_cu = tn[t][(k + 2) % 3]
        g_prev = tn[g][0]
        g_next = tn[g][1]

        tv[t][:] = [u, p, c]          # T_a
        t_b = self._new_tri(p, w, c)
        tv[g][:] = [p, u, GHOST]      # hull edge u -> p
        g2 = self._new_tri(w, p, GHOST)   # hull edge p -> w
        tn[t] = [t_b, n_cu, g]
        tn[t_b] = [n_wc, t, g2]
        tn[g] = [g_prev, g2, t]
        tn[g2] = [g, g_next, t_b]
        self._set_neighbor(n_wc, t, t_b)
        self._set_neighbor(g_next, g, g2)
        vt = self._vtri
        vt[p] = t
        vt[u] = t
        vt[w] = t_b
        vt[c] = t
        self._legalize([(t, 1), (t_b, 0)])

    def _insert_outside(self, g0: int, p: int) -> None:
        px, py, tv, tn = self._px, self._py, self._tv, self._tn
        x, y = px[p], py[p]

        def visible(g: int) -> bool:
            b, a, _ = tv[g]   # hull edge a -> b
            return _orient(px[a], py[a], px[b], py[b], x, y) < 0

        ghosts = [g0]
        while True:
            g = tn[ghosts[0]][0]
            if g == ghosts[-1] or not visible(g):
                break
            ghosts.insert(0, g)
        while True:
            g = tn[ghosts[-1]][1]
            if g == ghosts[0] or not visible(g):
                break
            ghosts.append(g)

        # hull chain h_0 -> ... -> h_k over the visible edges
        chain = [tv[ghosts[0]][1]] + [tv[g][0] for g in ghosts]
        k = len(ghosts)
        outer_prev = tn[ghosts[0]][0]
        outer_next = tn[ghosts[-1]][1]
        # Capture (triangle, slot) pairs while the ghost ids are still live:
        # freed ids are recycled below, so searching for them later would be
        # ambiguous.
        inner = [(tn[g][2], tn[tn[g][2]].index(g)) for g in ghosts]
        prev_slot = tn[outer_prev].index(ghosts[0])
        next_slot = tn[outer_next].index(ghosts[-1])

        for g in ghosts:
            self._free_tri(g)
        tris = [self._new_tri(chain[i + 1], chain[i], p) for i in range(k)]
        g_a = self._new_tri(p, chain[0], GHOST)     # hull edge h_0 -> p
        g_b = self._new_tri(chain[k], p, GHOST)     # hull edge p -> h_k
        for i, t in enumerate(tris):
            left = tris[i - 1] if i > 0 else g_a
            right = tris[i + 1] if i < k - 1 else g_b
            it, islot = inner[i]
            tn[t] = [left, right, it]
            tn[it][islot] = t
        tn[g_a] = [outer_prev, g_b, tris[0]]
        tn[g_b] = [g_a, outer_next, tris[-1]]
        tn[outer_prev][prev_slot] = g_a
        tn[outer_next][next_slot] = g_b

        vt = self._vtri
        vt[p] = tris[0]
        for i, t in enumerate(tris):
            vt[chain[i]] = t
            vt[chain[i + 1]] = t
        self._legalize([(t, 2) for t in tris])

    # -- legalization ------------------------------------------------------

    def _legalize(self, stack: List[Tuple[int, int]]) -> None:
        px, py, tv, tn = self._px, self._py, self._tv, self._tn
        while stack:
            t, iv = stack.pop()
            n = tn[t][iv]
            if tv[n][2] == GHOST:
                continue
            v = tv[t][iv]
            p1 = tv[t][(iv + 1) % 3]
            p2 = tv[t][(iv + 2) % 3]
            i_p1 = tv[n].index(p1)
            i_p2 = tv[n].index(p2)
            d = tv[n][3 - i_p1 - i_p2]
            a, b, c = tv[t]
            if _incircle(px[a], py[a], px[b], py[b], px[c], py[c],
                         px[d], py[d]) > 0:
                self._flip(t, iv, n, d, i_p1, i_p2)
                stack.append((t, 0))
                stack.append((n, 0))

    def _flip(self, t: int, iv: int, n: int, d: int,
              i_p1: int, i_p2: int) -> None:
        """Replace shared edge (p1,p2) of t=(v,p1,p2) and n by diagonal (v,d)."""
        tv, tn = self._tv, self._tn
        v = tv[t][iv]
        p1 = tv[t][(iv + 1) % 3]
        p2 = tv[t][(iv + 2) % 3]
        nb_a = tn[t][(iv + 1) % 3]   # across (p2, v)
        nb_b = tn[t][(iv + 2) % 3]   # across (v, p1)
        nb_c = tn[n][i_p2]           # across (p1, d)
        nb_d = tn[n][i_p1]           # across (d, p2)

        tv[t][:] = [v, p1, d]
        tv[n][:] = [v, d, p2]
        tn[t] = [nb_c, n, nb_b]
        tn[n] = [nb_d, nb_a, t]
        self._set_neighbor(nb_a, t, n)
        self._set_neighbor(nb_c, n, t)
        vt = self._vtri
        vt[v] = t
        vt[d] = t
        vt[p1] = t
        vt[p2] = n

    # ------------------------------------------------------------------
    # deletion

    def delete(self, node_id: int, self_check: bool = False) -> None:
        """Remove a vertex and retriangulate its star cavity."""
        vi = self._require(node_id)
        if self._n_real == 0:
            self._drop_vertex(vi)
        elif len(self._int) <= 3:
            self._drop_vertex(vi)
            self._clear_structure()
        else:
            self._delete_vertex(vi)
            if self._n_real == 0:
                self._clear_structure()
        if self_check:
            self.validate(check_planarity=True)

    def _clear_structure(self) -> None:
        """Fall back to degenerate mode, then retry the bootstrap."""
        self._tv = []
        self._tn = []
        self._tfree = []
        self._n_real = 0
        for vi in self._order:
            self._vtri[vi] = None
        self._try_leave_degenerate()

    def _star_ring(self, v: int) -> Tuple[List[int], List[int]]:
        """Ring vertices (CCW around v; may contain GHOST once) + triangles."""
        tv, tn = self._tv, self._tn
        t0 = self._vtri[v]
        ring: List[int] = []
        tris: List[int] = []
        t = t0
        while True:
            iv = tv[t].index(v)
            ring.append(tv[t][(iv + 1) % 3])
            tris.append(t)
            t = tn[t][(iv + 1) % 3]
            if t == t0:
                break
        return ring, tris

    def _delete_vertex(self, v: int) -> None:
        tv, tn = self._tv, self._tn
        ring, tris = self._star_ring(v)
        m = len(ring)

        def outer_of(i: int) -> Tuple[int, int]:
            # (triangle, slot) across ring edge (ring[i], ring[i+1])
            t = tris[i]
            o = tn[t][tv[t].index(v)]
            return (o, tn[o].index(t))

        holders: Dict[Tuple[int, int], Tuple[int, int]] = {}
        if GHOST in ring:
            gi = ring.index(GHOST)
            chain = [ring[(gi + 1 + j) % m] for j in range(m - 1)]
            for j in range(m - 2):
                i = (gi + 1 + j) % m
                holders[self._ekey(chain[j], chain[j + 1])] = outer_of(i)
            closed = False
            # surviving hull ghosts on both sides of the removed fan
            g_in = tris[(gi - 1) % m]    # ghost of hull edge ending at v
            g_out = tris[gi]             # ghost of hull edge leaving v
            outer_n = tn[g_out][1]       # ghost after v along the hull
            outer_p = tn[g_in][0]        # ghost before v along the hull
        else:
            chain = ring
            for i in range(m):
                holders[self._ekey(ring[i], ring[(i + 1) % m])] = outer_of(i)
            closed = True
            outer_n = outer_p = -1

        for t in tris:
            self._free_tri(t)
        self._drop_vertex(v)

        new_tris = self._fill_cavity(chain, closed, holders,
                                     outer_p, outer_n)
        # conservative cleanup: legalize every edge of the refilled cavity
        self._legalize([(t, i) for t in new_tris for i in range(3)])

    @staticmethod
    def _ekey(a: int, b: int) -> Tuple[int, int]:
        return (a, b) if a < b else (b, a)

    def _fill_cavity(self, chain: List[int], closed: bool,
                     holders: Dict[Tuple[int, int], Tuple[int, int]],
                     outer_p: int, outer_n: int) -> List[int]:
        """Ear-clip the cavity boundary into Delaunay triangles.

        ``holders`` maps each boundary edge to the (triangle, slot) to wire
        across it; fresh cavity triangles register themselves there for
        their exposed chord.  For an open chain, the unclipped remainder
        becomes new hull, stitched between the surviving ghosts ``outer_p``
        (before the gap) and ``outer_n`` (after it).
        """
        px, py, tn = self._px, self._py, self._tn
        poly = list(chain)
        new_tris: List[int] = []

        def wire(t: int, slot: int, a: int, b: int) -> None:
            other, oslot = holders.pop(self._ekey(a, b))
            tn[t][slot] = other
            tn[other][oslot] = t

        def clip(i: int) -> None:
            n = len(poly)
            u = poly[(i - 1) % n]
            vv = poly[i]
            w = poly[(i + 1) % n]
            t = self._new_tri(u, vv, w)
            new_tris.append(t)
            wire(t, 2, u, vv)
            wire(t, 0, vv, w)
            holders[self._ekey(u, w)] = (t, 1)
            self._vtri[u] = t
            self._vtri[vv] = t
            self._vtri[w] = t
            poly.pop(i)

        def ear_ok(i: int) -> bool:
            n = len(poly)
            u = poly[(i - 1) % n]
            vv = poly[i]
            w = poly[(i + 1) % n]
            if _orient(px[u], py[u], px[vv], py[vv], px[w], py[w]) <= 0:
                return False
            for z in poly:
                if z in (u, vv, w):
                    continue
                if (_orient(px[u], py[u], px[vv], py[vv], px[z], py[z]) >= 0
                        and _orient(px[vv], py[vv], px[w], py[w],
                                    px[z], py[z]) >= 0
                        and _orient(px[w], py[w], px[u], py[u],
                                    px[z], py[z]) >= 0):
                    return False
                if _incircle(px[u], py[u], px[vv], py[vv], px[w], py[w],
                             px[z], py[z]) > 0:
                    return False
            return True

        if closed:
            while len(poly) > 3:
                for i in range(len(poly)):
                    if ear_ok(i):
                        clip(i)
                        break
                else:  # pragma: no cover - cannot happen for star cavities
                    raise TriangulationError("cavity retriangulation failed")
            u, vv, w = poly
            t = self._new_tri(u, vv, w)
            new_tris.append(t)
            wire(t, 2, u, vv)
            wire(t, 0, vv, w)
            wire(t, 1, w, u)
            for z in (u, vv, w):
                self._vtri[z] = t
        else:
            progress = True
            while len(poly) > 2 and progress:
                progress = False
                for i in range(1, len(poly) - 1):
                    if ear_ok(i):
                        clip(i)
                        progress = True
                        break
            # the unclipped chain becomes new hull: one ghost per edge
            ghosts = [self._new_tri(poly[j], poly[j + 1], GHOST)
                      for j in range(len(poly) - 1)]
            last = len(ghosts) - 1
            for j, g in enumerate(ghosts):
                tn[g][0] = ghosts[j + 1] if j < last else outer_p
                tn[g][1] = ghosts[j - 1] if j > 0 else outer_n
                wire(g, 2, poly[j], poly[j + 1])
            tn[outer_n][0] = ghosts[0]
            tn[outer_p][1] = ghosts[-1]
            for j, g in enumerate(ghosts):
                self._vtri[poly[j]] = g
                self._vtri[poly[j + 1]] = g
        return new_tris

    # ------------------------------------------------------------------
    # edge-level operations

    def _edge_tri(self, u: int, v: int) -> Tuple[int, int]:
        """A real triangle containing edge (u, v) plus the opposite slot."""
        start = self._vtri[u]
        t = start
        tv, tn = self._tv, self._tn
        while True:
            verts = tv[t]
            if v in verts and verts[2] != GHOST:
                iu = verts.index(u)
                iv_ = verts.index(v)
                return t, 3 - iu - iv_
            iu = verts.index(u)
            t = tn[t][(iu + 1) % 3]
            if t == start:
                raise TriangulationError(
                    f"no edge between nodes {self._ext[u]} and {self._ext[v]}")

    def is_illegal(self, edge: Tuple[int, int]) -> bool:
        """True iff the opposite vertices violate the empty-circle test."""
        u, v = (self._require(e) for e in edge)
        t, slot = self._edge_tri(u, v)
        n = self._tn[t][slot]
        if self._tv[n][2] == GHOST:
            raise TriangulationError("edge is on the boundary")
        tv = self._tv
        i_u = tv[n].index(u)
        i_v = tv[n].index(v)
        d = tv[n][3 - i_u - i_v]
        px, py = self._px, self._py
        a, b, c = tv[t]
        return _incircle(px[a], py[a], px[b], py[b], px[c], py[c],
                         px[d], py[d]) > 0

    def flip(self, edge: Tuple[int, int]) -> None:
        """Flip an internal edge to the crossing diagonal (no legalization)."""
        u, v = (self._require(e) for e in edge)
        t, slot = self._edge_tri(u, v)
        n = self._tn[t][slot]
        if self._tv[n][2] == GHOST:
            raise TriangulationError("cannot flip a boundary edge")
        tv = self._tv
        c = tv[t][slot]
        i_u = tv[n].index(u)
        i_v = tv[n].index(v)
        d = tv[n][3 - i_u - i_v]
        px, py = self._px, self._py
        o1 = _orient(px[c], py[c], px[d], py[d], px[u], py[u])
        o2 = _orient(px[c], py[c], px[d], py[d], px[v], py[v])
        if o1 == 0 or o2 == 0 or o1 == o2:
            raise TriangulationError(
                "flip undefined: the two triangles do not form a convex quad")
        p1 = tv[t][(slot + 1) % 3]
        self._flip(t, slot, n, d, tv[n].index(p1),
                   tv[n].index(tv[t][(slot + 2) % 3]))

    # ------------------------------------------------------------------
    # validation

    def validate(self, check_delaunay: bool = True,
                 check_planarity: bool = False) -> None:
        """Assert structural invariants; optionally re-sweep for crossings."""
        if self._n_real == 0:
            return
        px, py, tv, tn = self._px, self._py, self._tv, self._tn
        alive = set(self._alive_tris())
        for t in alive:
            a, b, c = tv[t]
            if c != GHOST:
                assert _orient(px[a], py[a], px[b], py[b], px[c], py[c]) > 0, \
                    f"triangle {t} not CCW"
            for i in range(3):
                n = tn[t][i]
                assert n in alive, f"triangle {t} has dead neighbor"
                assert t in tn[n], f"adjacency of {t} and {n} not mutual"
                e1 = tv[t][(i + 1) % 3]
                e2 = tv[t][(i + 2) % 3]
                assert e1 in tv[n] and e2 in tv[n], \
                    f"neighbor {n} of {t} does not share edge ({e1},{e2})"
        if check_delaunay:
            verts = list(self._int.values())
            for t in alive:
                a, b, c = tv[t]
                if c == GHOST:
                    continue
                for d in verts:
                    if d in (a, b, c):
                        continue
                    assert _incircle(px[a], py[a], px[b], py[b],
                                     px[c], py[c], px[d], py[d]) <= 0, \
                        "empty-circumcircle property violated"
        if check_planarity:
            from .sweep import count_crossings
            assert count_crossings(link_graph(self)) == 0, \
                "triangulation links cross"


# ----------------------------------------------------------------------
# module-level operations


def build_delaunay(nodes: NodeSet | Dict[int, Point], seed: int = 0,
                   rng: Optional[random.Random] = None,
                   self_check: bool = False) -> Triangulation:
    """Triangulate a node set by randomized incremental insertion.

    The insertion order is shuffled with the seeded generator, so results
    are reproducible per seed (and independent of the order for point sets
    in general position).
    """
    points = nodes.as_dict() if isinstance(nodes, NodeSet) else dict(nodes)
    order = sorted(points)
    (rng or random.Random(seed)).shuffle(order)
    t = Triangulation()
    if points:
        xs = [p.ux for p in points.values()]
        ys = [p.uy for p in points.values()]
        span = max(max(xs) - min(xs), max(ys) - min(ys), 1)
        t._grid_cell = max(1, int(span / max(1.0, len(points) ** 0.5)))
    for nid in order:
        t.insert(points[nid], nid)
    if self_check:
        t.validate(check_planarity=True)
    return t


def insert_node(t: Triangulation, p: Point,
                node_id: Optional[int] = None) -> int:
    """Insert one node into an existing triangulation; returns its id."""
    return t.insert(p, node_id)


def delete_node(t: Triangulation, node_id: int) -> None:
    """Delete a node and restore the Delaunay property."""
    t.delete(node_id)


def link_graph(t: Triangulation) -> Topology:
    """The topology whose links are exactly the triangulation's edges."""
    nodes = NodeSet(t.points())
    return Topology(nodes, t.edges())
