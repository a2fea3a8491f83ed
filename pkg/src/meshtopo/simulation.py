"""Seeded slotted-time packet simulator for topology comparisons.

The MAC model is deliberately small and fully declared here: time advances
in fixed slots; a node with a queued, routable packet is eligible; in a
seeded random order each eligible node defers if any already-committed
transmitter lies within its own transmission range (carrier sense), and
otherwise commits with probability p.  A transmission u -> v succeeds iff
v itself is not transmitting (half duplex) and no other committed
transmitter covers v (collision).  Failed packets stay queued; a packet
arriving at a full relay queue is dropped; delivery to the destination
counts toward throughput and delay.

Traffic is backlogged file transfer in the transport sense: a flow always
has data to send but keeps at most ``flow_window`` packets in flight, the
way a TCP-borne FTP session would.  A fresh packet enters the source
queue whenever the flow is below its window; a packet arriving at a full
queue is dropped and counts as loss; delay runs from entering the source
queue to delivery.  An uncontended single-hop flow is served every slot,
so its queue never builds and its delay is exactly one slot.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .geometry import UM_PER_M, dist2_um
from .interference import _range2_um
from .topology import NodeGrid, Topology


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class Flow:
    source: int
    destination: int


@dataclass
class SimParams:
    slot_s: float = 0.008            # 1000-byte packet at 1 Mb/s
    duration_s: float = 30.0
    queue_capacity: int = 50
    p_transmit: float = 0.5
    seed: int = 0
    packet_bits: int = 8000
    flow_window: int = 4             # max packets in flight per flow

    def __post_init__(self) -> None:
        if self.slot_s <= 0 or self.duration_s <= 0:
            raise SimulationError("slot and duration must be positive")
        if self.queue_capacity <= 0 or self.packet_bits <= 0:
            raise SimulationError("queue capacity and packet size must be positive")
        if not 0 < self.p_transmit <= 1:
            raise SimulationError("p_transmit must be in (0, 1]")
        if self.flow_window <= 0:
            raise SimulationError("flow_window must be positive")


@dataclass
class FlowStats:
    delivered: int = 0
    delay_total_s: float = 0.0

    def mean_delay_s(self) -> float:
        return self.delay_total_s / self.delivered if self.delivered else math.nan


@dataclass
class SimReport:
    throughput_bps: float
    loss_rate: float
    mean_delay_s: float
    injected: int
    delivered: int
    dropped: int
    queued_at_end: int
    per_flow: Dict[Flow, FlowStats] = field(default_factory=dict)


def generate_flows(topo: Topology, count: int, seed: int = 0) -> List[Flow]:
    """``count`` distinct (source, destination) pairs among connected pairs."""
    if count < 0:
        raise SimulationError("flow count must be >= 0")
    if count == 0:
        return []
    pairs: List[Tuple[int, int]] = []
    for comp in topo.connected_components():
        members = sorted(comp)
        pairs.extend((a, b) for a in members for b in members if a != b)
    if count > len(pairs):
        raise SimulationError(
            f"requested {count} flows but only {len(pairs)} connected "
            f"ordered pairs exist")
    pairs.sort()
    chosen = random.Random(seed).sample(pairs, count)
    return [Flow(a, b) for a, b in chosen]


class RoutingTable:
    """Minimum-hop next-hop table; ties broken toward the smaller node id."""

    def __init__(self, next_hop: Dict[int, Dict[int, int]],
                 hops: Dict[int, Dict[int, int]]):
        self._next = next_hop
        self._hops = hops

    def next_hop(self, node: int, dest: int) -> Optional[int]:
        return self._next.get(dest, {}).get(node)

    def hops(self, node: int, dest: int) -> Optional[int]:
        if node == dest:
            return 0
        return self._hops.get(dest, {}).get(node)

    def reachable(self, node: int, dest: int) -> bool:
        return node == dest or self.next_hop(node, dest) is not None


def shortest_paths(topo: Topology,
                   destinations: Optional[List[int]] = None) -> RoutingTable:
    """BFS per destination over the link graph."""
    next_hop: Dict[int, Dict[int, int]] = {}
    hops: Dict[int, Dict[int, int]] = {}
    dests = sorted(destinations) if destinations is not None \
        else sorted(topo.nodes)
    for dest in dests:
        dist = {dest: 0}
        frontier = deque([dest])
        while frontier:
            u = frontier.popleft()
            for w in sorted(topo.neighbors(u)):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    frontier.append(w)
        nh: Dict[int, int] = {}
        for u, d in dist.items():
            if u == dest:
                continue
            nh[u] = min(w for w in topo.neighbors(u)
                        if dist.get(w, -1) == d - 1)
        next_hop[dest] = nh
        hops[dest] = {u: d for u, d in dist.items() if u != dest}
    return RoutingTable(next_hop, hops)


def run_sim(topo: Topology, flows: List[Flow], params: SimParams) -> SimReport:
    """Run the slotted simulation; bit-identical results per seed."""
    for f in flows:
        if f.source == f.destination:
            raise SimulationError(f"flow {f} loops on itself")
        if f.source not in topo.nodes or f.destination not in topo.nodes:
            raise SimulationError(f"flow {f} references unknown nodes")

    rng = random.Random(params.seed)
    nodes = sorted(topo.nodes)
    routing = shortest_paths(
        topo, destinations=sorted({f.destination for f in flows}))

    # exact coverage sets: in_range_of[u] = nodes u hears; covered_by[v] =
    # transmitters that reach v
    grid = NodeGrid(topo.nodes.as_dict())
    in_range_of: Dict[int, frozenset] = {}
    covered_by: Dict[int, set] = {u: set() for u in nodes}
    for u in nodes:
        r2 = _range2_um(topo, u)
        cover = {v for v in grid.within2(topo.nodes[u], r2) if v != u}
        in_range_of[u] = frozenset(cover)
        for v in cover:
            covered_by[v].add(u)

    queues: Dict[int, deque] = {u: deque() for u in nodes}
    in_flight = [0] * len(flows)
    stats = {f: FlowStats() for f in flows}
    injected = delivered = dropped = 0
    delay_total = 0.0

    n_slots = round(params.duration_s / params.slot_s)
    cap = params.queue_capacity
    p = params.p_transmit
    window = params.flow_window
    flow_list = list(enumerate(flows))

    for slot in range(n_slots):
        for fi, f in flow_list:
            while in_flight[fi] < window and len(queues[f.source]) < cap:
                queues[f.source].append((fi, slot))
                in_flight[fi] += 1
                injected += 1

        active = [u for u in nodes if queues[u]]
        rng.shuffle(active)
        committed: set = set()
        busy: set = set()        # committed transmitters and their receivers
        txs: List[Tuple[int, int, Tuple[int, int]]] = []
        for u in active:
            fi, t0 = queues[u][0]
            nh = routing.next_hop(u, flows[fi].destination)
            if nh is None:
                # unroutable head packet: drop it, keep conservation exact
                queues[u].popleft()
                dropped += 1
                in_flight[fi] -= 1
                continue
            # carrier sense, including the reserved receivers (the virtual
            # carrier sense an RTS/CTS handshake provides)
            if busy & in_range_of[u]:
                continue
            if p >= 1.0 or rng.random() < p:
                committed.add(u)
                busy.add(u)
                busy.add(nh)
                txs.append((u, nh, (fi, t0)))

        for u, v, (fi, t0) in txs:
            if v in committed:
                continue
            others = covered_by[v] & committed
            others.discard(u)
            if others:
                continue
            queues[u].popleft()
            f = flows[fi]
            if v == f.destination:
                delivered += 1
                in_flight[fi] -= 1
                delay = (slot + 1 - t0) * params.slot_s
                delay_total += delay
                st = stats[f]
                st.delivered += 1
                st.delay_total_s += delay
            elif len(queues[v]) < cap:
                queues[v].append((fi, t0))
            else:
                dropped += 1
                in_flight[fi] -= 1

    queued = sum(len(q) for q in queues.values())
    assert injected == delivered + dropped + queued, "packet conservation"
    duration = n_slots * params.slot_s
    return SimReport(
        throughput_bps=delivered * params.packet_bits / duration,
        loss_rate=(dropped / injected) if injected else 0.0,
        mean_delay_s=(delay_total / delivered) if delivered else math.nan,
        injected=injected,
        delivered=delivered,
        dropped=dropped,
        queued_at_end=queued,
        per_flow=stats,
    )
