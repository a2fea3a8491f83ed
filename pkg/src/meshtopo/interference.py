"""Per-node transmission range and interference classification.

A node's transmission range is the length of its longest incident link
(or the topology's fixed range override).  Every node inside that radius
suffers direct interference when the node transmits; nodes outside it that
are link-adjacent to a directly interfered node suffer indirect
interference; the rest are unaffected.

All radius comparisons are made on exact squared distances in integer
micrometers, so boundary cases (a node exactly at range) are decided
without floating-point noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional, Set, Tuple

from .geometry import UM_PER_M, dist2_um
from .topology import NodeGrid, Topology


class InterferenceError(ValueError):
    pass


def _range2_um(topo: Topology, u: int) -> int:
    """Exact squared transmission range in square micrometers."""
    if topo.fixed_range_m is not None:
        r = round(topo.fixed_range_m * UM_PER_M)
        return r * r
    pu = topo.nodes[u]
    best = 0
    for v in topo.neighbors(u):
        d2 = dist2_um(pu, topo.nodes[v])
        if d2 > best:
            best = d2
    return best


def transmission_range(topo: Topology, u: int) -> float:
    """Longest incident link length in meters (0 for an isolated node)."""
    if u not in topo.nodes:
        raise InterferenceError(f"unknown node {u}")
    if topo.fixed_range_m is not None:
        return float(topo.fixed_range_m)
    return math.sqrt(_range2_um(topo, u)) / UM_PER_M


def classify(topo: Topology, u: int,
             grid: Optional[NodeGrid] = None
             ) -> Tuple[Set[int], Set[int], Set[int]]:
    """Partition all other nodes into (direct, indirect, none) for node u."""
    if u not in topo.nodes:
        raise InterferenceError(f"unknown node {u}")
    r2 = _range2_um(topo, u)
    pu = topo.nodes[u]
    if grid is not None:
        direct = {v for v in grid.within2(pu, r2) if v != u}
    else:
        direct = {v for v in topo.nodes
                  if v != u and dist2_um(pu, topo.nodes[v]) <= r2}
    indirect = set()
    for w in direct:
        indirect.update(topo.neighbors(w))
    indirect -= direct
    indirect.discard(u)
    rest = {v for v in topo.nodes if v != u} - direct - indirect
    return direct, indirect, rest


@dataclass
class InterferenceReport:
    """Per-node direct/indirect partitions plus aggregate statistics."""

    direct: Dict[int, FrozenSet[int]]
    indirect: Dict[int, FrozenSet[int]]
    total_degree: int
    average_degree: float
    average_range_m: float
    average_interference_rate: float
    _n: int = field(repr=False, default=0)

    def none(self, u: int) -> Set[int]:
        keys = set(self.direct)
        keys.discard(u)
        return keys - self.direct[u] - self.indirect[u]


def build_report(topo: Topology) -> InterferenceReport:
    """Classify every node and aggregate the headline metrics."""
    n = topo.n_nodes()
    if n == 0:
        raise InterferenceError("empty topology")
    grid = NodeGrid(topo.nodes.as_dict()) if n > 64 else None
    direct: Dict[int, FrozenSet[int]] = {}
    indirect: Dict[int, FrozenSet[int]] = {}
    range_sum = 0.0
    rate_sum = 0.0
    for u in topo.nodes:
        d, ind, _none = _classify_fast(topo, u, grid)
        direct[u] = frozenset(d)
        indirect[u] = frozenset(ind)
        range_sum += transmission_range(topo, u)
        if n > 1:
            rate_sum += len(d) / (n - 1)
    total, avg = degree_stats(topo)
    return InterferenceReport(
        direct=direct,
        indirect=indirect,
        total_degree=total,
        average_degree=avg,
        average_range_m=range_sum / n,
        average_interference_rate=rate_sum / n,
        _n=n,
    )


def _classify_fast(topo: Topology, u: int, grid: Optional[NodeGrid]
                   ) -> Tuple[Set[int], Set[int], None]:
    """classify() without materializing the (possibly huge) 'none' set."""
    r2 = _range2_um(topo, u)
    pu = topo.nodes[u]
    if grid is not None:
        direct = {v for v in grid.within2(pu, r2) if v != u}
    else:
        direct = {v for v in topo.nodes
                  if v != u and dist2_um(pu, topo.nodes[v]) <= r2}
    indirect = set()
    for w in direct:
        indirect.update(topo.neighbors(w))
    indirect -= direct
    indirect.discard(u)
    return direct, indirect, None


def interference_rate(topo: Topology) -> float:
    """Mean over nodes of |direct(u)| / (n - 1); 1.0 for a full-range mesh."""
    n = topo.n_nodes()
    if n < 2:
        raise InterferenceError("interference rate needs at least 2 nodes")
    grid = NodeGrid(topo.nodes.as_dict()) if n > 64 else None
    total = 0.0
    for u in topo.nodes:
        d, _, _ = _classify_fast(topo, u, grid)
        total += len(d) / (n - 1)
    return total / n


def degree_stats(topo: Topology) -> Tuple[int, float]:
    """(total degree, average degree); total is twice the link count."""
    total = 2 * len(topo.links)
    n = topo.n_nodes()
    return total, (total / n if n else 0.0)
