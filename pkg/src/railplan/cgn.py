"""Period-extended change&go-network.

Station nodes exist for every (station, period) pair, travel nodes for every
(stop, line) pair. Travel arcs follow the line's stops; board arcs lead from a
station node to the travel nodes of lines of the same period halting there,
alight arcs lead back. Freight may additionally wait at a station through
interperiod arcs (i, t) -> (i, t+1).
"""
from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass

from .config import Params
from .line_pool import Line, segment_minutes
from .network import DemandEntry, PhysicalNetwork, round_half_up

TRAVEL = "travel"
BOARD = "board"
ALIGHT = "alight"
INTERPERIOD = "interperiod"

PASSENGER = "passenger"
FREIGHT = "freight"


@dataclass(frozen=True)
class CgnNode:
    id: int
    kind: str  # "travel" | "station"
    station: str
    line: int | None = None  # travel nodes
    period: str | None = None  # station nodes; for travel nodes the line's period

    @property
    def is_travel(self) -> bool:
        return self.kind == "travel"

    def label(self) -> str:
        if self.is_travel:
            return f"T({self.station},l{self.line})"
        return f"S({self.station},{self.period})"


@dataclass(frozen=True)
class CgnArc:
    id: int
    kind: str
    tail: int
    head: int
    duration: int
    line: int | None = None
    passenger_capacity: float = 0.0
    freight_capacity: float = 0.0
    freight_only: bool = False

    def capacity(self, kind: str) -> float:
        return self.passenger_capacity if kind == PASSENGER else self.freight_capacity


class ChangeGoNetwork:
    """Nodes, arcs and lookup indices; treated as immutable once built."""

    def __init__(self, net: PhysicalNetwork, pool: list[Line], params: Params,
                 nodes, arcs, disabled_lines=frozenset()):
        self.net = net
        self.pool = pool
        self.lines = {ln.id: ln for ln in pool}
        self.params = params
        self.nodes: list[CgnNode] = nodes
        self.arcs: list[CgnArc] = arcs
        self.disabled_lines = frozenset(disabled_lines)
        self.period_ids = net.period_ids
        self.station_node = {(n.station, n.period): n.id for n in nodes if not n.is_travel}
        self.travel_node = {(n.station, n.line): n.id for n in nodes if n.is_travel}
        self.line_arcs = defaultdict(list)
        for a in arcs:
            if a.kind == TRAVEL:
                self.line_arcs[a.line].append(a.id)
        self.track_period_lines = defaultdict(list)
        for ln in pool:
            for key in self.line_track_keys(ln):
                self.track_period_lines[key].append(ln.id)
        self._adj = {}

    # -- indices ----------------------------------------------------------
    def line_track_keys(self, ln: Line):
        """Throughput keys (track, period) a line consumes, one per traversed track."""
        st = ln.route.stations
        for u, v in zip(st, st[1:]):
            if self.params.joint_directions:
                yield ((u, v) if u <= v else (v, u), ln.period)
            else:
                yield ((u, v), ln.period)

    def throughput_limit(self, key) -> float:
        _, period = key
        return self.params.throughput_per_hour * self.net.period(period).hours

    def arc_enabled(self, arc: CgnArc) -> bool:
        if not self.disabled_lines:
            return True
        for end in (arc.tail, arc.head):
            n = self.nodes[end]
            if n.is_travel and n.line in self.disabled_lines:
                return False
        return True

    def arc_allowed(self, arc: CgnArc, kind: str) -> bool:
        """Whether a path of the given demand kind may use the arc."""
        if kind == PASSENGER and arc.freight_only:
            return False
        if arc.kind == TRAVEL and not arc.capacity(kind) > 0:
            return False
        return self.arc_enabled(arc)

    def out_arcs(self, kind: str) -> list[list[CgnArc]]:
        """Adjacency restricted to arcs usable by ``kind`` (cached)."""
        if kind not in self._adj:
            adj = [[] for _ in self.nodes]
            for a in self.arcs:
                if self.arc_allowed(a, kind):
                    adj[a.tail].append(a)
            self._adj[kind] = adj
        return self._adj[kind]

    def source_node(self, demand: DemandEntry) -> int:
        if demand.is_passenger:
            return self.station_node[(demand.origin, demand.period)]
        return self.station_node[(demand.origin, self.period_ids[0])]

    def sink_nodes(self, demand: DemandEntry) -> list[int]:
        if demand.is_passenger:
            return [self.station_node[(demand.destination, demand.period)]]
        return [self.station_node[(demand.destination, t)] for t in self.period_ids]

    def step_duration(self, arc: CgnArc, started: bool) -> int:
        """Duration an arc adds; arcs before the first travel node count only if configured."""
        if started or self.params.count_initial_access:
            return arc.duration
        return 0 if arc.kind in (BOARD, INTERPERIOD) else arc.duration

    def path_duration(self, arcs) -> int:
        total, started = 0, False
        for aid in arcs:
            a = self.arcs[aid]
            total += self.step_duration(a, started)
            started = started or self.nodes[a.head].is_travel
        return total

    def without_lines(self, lines) -> "ChangeGoNetwork":
        """Reduced copy with the travel nodes of ``lines`` (and adjacent arcs) removed.

        Node and arc ids are kept so master rows stay aligned.
        """
        return ChangeGoNetwork(self.net, self.pool, self.params, self.nodes, self.arcs,
                               self.disabled_lines | frozenset(lines))

    def counts(self) -> dict:
        kinds = defaultdict(int)
        for a in self.arcs:
            kinds[a.kind] += 1
        return {
            "travel_nodes": sum(1 for n in self.nodes if n.is_travel),
            "station_nodes": sum(1 for n in self.nodes if not n.is_travel),
            "travel_arcs": kinds[TRAVEL],
            "board_arcs": kinds[BOARD],
            "alight_arcs": kinds[ALIGHT],
            "interperiod_arcs": kinds[INTERPERIOD],
        }

    def dump(self) -> str:
        """Deterministic node/arc listing."""
        out = ["# nodes"]
        for n in self.nodes:
            out.append(f"{n.id} {n.label()}")
        out.append("# arcs")
        for a in self.arcs:
            extra = ""
            if a.kind == TRAVEL:
                extra = f" line={a.line} cap=({a.passenger_capacity:g},{a.freight_capacity:g})"
            if a.freight_only:
                extra += " freight-only"
            out.append(f"{a.id} {a.kind} {self.nodes[a.tail].label()}->{self.nodes[a.head].label()}"
                       f" dur={a.duration}{extra}")
        return "\n".join(out) + "\n"


def build_cgn(net: PhysicalNetwork, pool: list[Line], params: Params | None = None) -> ChangeGoNetwork:
    params = params or Params()
    nodes: list[CgnNode] = []
    arcs: list[CgnArc] = []
    station_node = {}
    for p in net.periods:
        for s in net.stations:
            station_node[(s.id, p.id)] = len(nodes)
            nodes.append(CgnNode(len(nodes), "station", s.id, None, p.id))

    travel = []
    for ln in pool:
        ids = []
        for s in ln.route.stops:
            ids.append(len(nodes))
            nodes.append(CgnNode(len(nodes), "travel", s, ln.id, ln.period))
        travel.append((ln, ids))

    for ln, ids in travel:
        for (i, j, seg), u, v in zip(ln.route.segments(), ids, ids[1:]):
            dur = segment_minutes(net, seg, params) + params.dwell_min
            arcs.append(CgnArc(len(arcs), TRAVEL, u, v, dur, ln.id,
                               ln.mode.passenger_capacity, ln.mode.freight_capacity))
    for ln, ids in travel:
        for s, tn in zip(ln.route.stops, ids):
            sn = station_node[(s, ln.period)]
            arcs.append(CgnArc(len(arcs), BOARD, sn, tn, params.transfer_min))
            arcs.append(CgnArc(len(arcs), ALIGHT, tn, sn, 0))

    if params.interperiod_at_transfers_only:
        routes_at = defaultdict(set)
        for ln in pool:
            for s in ln.route.stops:
                routes_at[s].add(ln.route.id)
        wait_at = [s.id for s in net.stations if len(routes_at[s.id]) >= 2]
    else:
        wait_at = net.station_ids
    for p, q in zip(net.periods, net.periods[1:]):
        wait = round_half_up(p.hours * 60.0)
        for s in wait_at:
            arcs.append(CgnArc(len(arcs), INTERPERIOD, station_node[(s, p.id)],
                               station_node[(s, q.id)], wait, freight_only=True))
    return ChangeGoNetwork(net, pool, params, nodes, arcs)


# ---------------------------------------------------------------------------
# Travel times and path rules
# ---------------------------------------------------------------------------

def fastest_path(cgn: ChangeGoNetwork, source: int, sinks, kind: str):
    """Minimum-duration path from ``source`` to any of ``sinks``.

    Returns ``(duration, arc ids)`` or ``None`` when no sink is reachable.
    The search state is (node, started) because arcs before the first travel
    node may be free.
    """
    adj = cgn.out_arcs(kind)
    sinks = set(sinks)
    start = (source, False)
    dist = {start: 0}
    pred = {start: None}
    heap = [(0, 0, source, False)]
    while heap:
        d, _, u, started = heapq.heappop(heap)
        if d > dist[(u, started)]:
            continue
        if u in sinks and u != source:
            arcs = []
            state = (u, started)
            while pred[state] is not None:
                prev, aid = pred[state]
                arcs.append(aid)
                state = prev
            return d, arcs[::-1]
        for a in adj[u]:
            ns = started or cgn.nodes[a.head].is_travel
            nd = d + cgn.step_duration(a, started)
            key = (a.head, ns)
            if nd < dist.get(key, float("inf")):
                dist[key] = nd
                pred[key] = ((u, started), a.id)
                heapq.heappush(heap, (nd, a.id + 1, a.head, ns))
    return None


def min_travel_time(cgn: ChangeGoNetwork, demand: DemandEntry):
    """Minimal travel time in minutes for a demand's OD (and period), or None."""
    if demand.origin == demand.destination:
        raise ValueError("origin equals destination")
    res = fastest_path(cgn, cgn.source_node(demand), cgn.sink_nodes(demand), demand.kind)
    return None if res is None else res[0]


def duration_threshold(cgn: ChangeGoNetwork, demand: DemandEntry, min_time: float) -> float:
    factor = cgn.params.passenger_factor if demand.is_passenger else cgn.params.freight_factor
    return factor * min_time


def path_rules(cgn: ChangeGoNetwork, arcs, demand: DemandEntry, threshold: float) -> list[str]:
    """Check a path (arc id sequence) against the routing rules for its demand.

    Returns violations tagged (a) simplicity, (b) endpoints, (c) passenger
    period/arc restrictions, (d) interperiod direction, (e) duration, and
    (f) use of a travel arc lacking capacity for the demand kind.
    """
    problems = []
    if not arcs:
        return ["(b) empty path"]
    objs = [cgn.arcs[a] for a in arcs]
    for x, y in zip(objs, objs[1:]):
        if x.head != y.tail:
            return [f"(b) arcs {x.id} and {y.id} are not consecutive"]
    visited = [objs[0].tail] + [a.head for a in objs]
    if len(set(visited)) != len(visited):
        problems.append("(a) path repeats a node")
    first, last = cgn.nodes[visited[0]], cgn.nodes[visited[-1]]
    if first.is_travel or first.station != demand.origin:
        problems.append("(b) path does not start at an origin station node")
    if last.is_travel or last.station != demand.destination:
        problems.append("(b) path does not end at a destination station node")
    if demand.is_passenger:
        if any(a.freight_only for a in objs):
            problems.append("(c) passenger path uses a freight-only arc")
        if any((not cgn.nodes[n].is_travel and cgn.nodes[n].period != demand.period)
               or (cgn.nodes[n].is_travel and cgn.lines[cgn.nodes[n].line].period != demand.period)
               for n in visited):
            problems.append("(c) passenger path leaves its period")
    order = {p: i for i, p in enumerate(cgn.period_ids)}
    for a in objs:
        if a.kind == INTERPERIOD:
            if order[cgn.nodes[a.head].period] != order[cgn.nodes[a.tail].period] + 1:
                problems.append("(d) interperiod arc not forward")
    dur = cgn.path_duration(arcs)
    if dur > threshold + 1e-9:
        problems.append(f"(e) duration {dur} exceeds threshold {threshold:g}")
    if any(a.kind == TRAVEL and not a.capacity(demand.kind) > 0 for a in objs):
        problems.append(f"(f) travel arc without {demand.kind} capacity")
    return problems
