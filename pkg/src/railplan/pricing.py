"""Pricing: maximum reduced-cost paths under duration limits.

All demands sharing a source station node are priced together. A Dijkstra
run on the dual arc costs (ignoring durations) either certifies that no
improving path exists, or yields a path that is accepted when it also meets
the duration limit. Otherwise a label-correcting search with (cost,
duration) dominance under the duration cap finds the least-cost feasible
path.
"""
from __future__ import annotations

import heapq
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .cgn import PASSENGER, TRAVEL, ChangeGoNetwork
from .config import RC_TOL

ELEMENTARY_CUTOFF = 64


@dataclass(frozen=True)
class Label:
    node: int
    cost: float
    duration: float
    started: bool = False
    n_arcs: int = 0
    arc: int | None = None
    pred: "Label | None" = None
    visited: int = 0  # node bitmask, only maintained in elementary mode

    def arcs(self) -> tuple[int, ...]:
        out = []
        lab = self
        while lab.arc is not None:
            out.append(lab.arc)
            lab = lab.pred
        return tuple(reversed(out))


def dominates(l1: Label, l2: Label) -> bool:
    """Strict Pareto dominance on (cost, duration)."""
    return (l1.cost <= l2.cost and l1.duration <= l2.duration
            and (l1.cost < l2.cost or l1.duration < l2.duration))


def _weakly_dominates(l1: Label, l2: Label, elementary: bool) -> bool:
    if l1.cost > l2.cost or l1.duration > l2.duration:
        return False
    if l1.started and not l2.started:
        return False
    if elementary and (l1.visited & ~l2.visited):
        return False
    return True


def arc_cost(arc, duals, kind: str) -> float:
    if arc.kind != TRAVEL:
        return 0.0
    return float(duals.delta[arc.id] if kind == PASSENGER else duals.epsilon[arc.id])


@dataclass(frozen=True)
class PricedPath:
    demand: int
    arcs: tuple[int, ...]
    reduced_cost: float
    phase: str  # "dijkstra" | "label"


def reduced_cost(cgn: ChangeGoNetwork, duals, demand, dm, arcs) -> float:
    base = dm.unit_revenue - duals.demand_dual(demand)
    return base - sum(arc_cost(cgn.arcs[a], duals, dm.kind) for a in arcs)


def _dijkstra(cgn, duals, source, kind):
    adj = cgn.out_arcs(kind)
    best = {source: (0.0, 0)}
    pred = {source: None}
    heap = [(0.0, 0, source)]
    done = set()
    while heap:
        c, k, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for a in adj[u]:
            v = a.head
            if v in done:
                continue
            key = (c + arc_cost(a, duals, kind), k + 1)
            if key < best.get(v, (float("inf"), 0)):
                best[v] = key
                pred[v] = a.id
                heapq.heappush(heap, (key[0], key[1], v))
    return best, pred


def _trace(cgn, pred, node):
    arcs = []
    while pred[node] is not None:
        aid = pred[node]
        arcs.append(aid)
        node = cgn.arcs[aid].tail
    return tuple(reversed(arcs))


def label_correcting(cgn: ChangeGoNetwork, duals, source: int, kind: str, max_duration: float,
                     cost_bound: float = float("inf"), elementary: bool = False):
    """Nondominated labels per node for paths from ``source``.

    Labels whose duration exceeds ``max_duration`` or whose cost reaches
    ``cost_bound`` are not extended.
    """
    adj = cgn.out_arcs(kind)
    nodes = cgn.nodes
    root = Label(source, 0.0, 0.0, visited=(1 << source) if elementary else 0)
    bags = defaultdict(list)
    bags[source].append(root)
    # labels dropped from a bag are skipped when popped; keyed by push order
    dead = set()
    seq_of = {id(root): 0}
    heap = [(0.0, 0.0, 0, root)]
    seq = 1
    while heap:
        _, _, s, lab = heapq.heappop(heap)
        if s in dead:
            continue
        for a in adj[lab.node]:
            v = a.head
            if elementary and (lab.visited >> v) & 1:
                continue
            dur = lab.duration + cgn.step_duration(a, lab.started)
            if dur > max_duration:
                continue
            cost = lab.cost + arc_cost(a, duals, kind)
            if cost >= cost_bound:
                continue
            new = Label(v, cost, dur, lab.started or nodes[v].is_travel, lab.n_arcs + 1, a.id, lab,
                        lab.visited | (1 << v) if elementary else 0)
            bag = bags[v]
            if any(_weakly_dominates(old, new, elementary) for old in bag):
                continue
            keep = []
            for old in bag:
                if _weakly_dominates(new, old, elementary):
                    dead.add(seq_of.pop(id(old)))
                else:
                    keep.append(old)
            keep.append(new)
            bags[v] = keep
            seq_of[id(new)] = seq
            heapq.heappush(heap, (cost, dur, seq, new))
            seq += 1
    return bags


def _is_simple(cgn, arcs) -> bool:
    seen = [cgn.arcs[arcs[0]].tail] + [cgn.arcs[a].head for a in arcs]
    return len(set(seen)) == len(seen)


def price_source(cgn: ChangeGoNetwork, duals, source: int, demand_ids, demands, thresholds,
                 tol: float = RC_TOL, elementary: bool | None = None) -> dict[int, PricedPath | None]:
    """Best improving path (or None) for each demand originating at ``source``."""
    result = {d: None for d in demand_ids}
    todo = [d for d in demand_ids
            if demands[d].unit_revenue - duals.demand_dual(d) > tol and d in thresholds]
    if not todo:
        return result
    kind = demands[todo[0]].kind
    best, pred = _dijkstra(cgn, duals, source, kind)
    need_labels = []
    for d in todo:
        dm = demands[d]
        base = dm.unit_revenue - duals.demand_dual(d)
        reach = [(best[s], s) for s in cgn.sink_nodes(dm) if s in best]
        if not reach:
            continue
        (cost, _), sink = min(reach)
        if base - cost <= tol:
            continue
        arcs = _trace(cgn, pred, sink)
        if cgn.path_duration(arcs) <= thresholds[d]:
            result[d] = PricedPath(d, arcs, reduced_cost(cgn, duals, d, dm, arcs), "dijkstra")
        else:
            need_labels.append(d)
    if not need_labels:
        return result

    if elementary is None:
        elementary = len(cgn.nodes) <= ELEMENTARY_CUTOFF
    found = _label_phase(cgn, duals, source, kind, need_labels, demands, thresholds, tol, elementary)
    if not elementary and any(p is not None and not _is_simple(cgn, p.arcs) for p in found.values()):
        found = _label_phase(cgn, duals, source, kind, need_labels, demands, thresholds, tol, True)
    result.update(found)
    return result


def _label_phase(cgn, duals, source, kind, demand_ids, demands, thresholds, tol, elementary):
    bases = {d: demands[d].unit_revenue - duals.demand_dual(d) for d in demand_ids}
    cap = max(thresholds[d] for d in demand_ids)
    bags = label_correcting(cgn, duals, source, kind, cap, max(bases.values()) - tol, elementary)
    out = {}
    for d in demand_ids:
        dm = demands[d]
        cands = [lab for s in cgn.sink_nodes(dm) for lab in bags.get(s, ())
                 if lab.duration <= thresholds[d]]
        out[d] = None
        if not cands:
            continue
        lab = min(cands, key=lambda l: (l.cost, l.n_arcs, l.arcs()))
        if bases[d] - lab.cost > tol:
            arcs = lab.arcs()
            out[d] = PricedPath(d, arcs, reduced_cost(cgn, duals, d, dm, arcs), "label")
    return out


def group_by_source(cgn: ChangeGoNetwork, demands, demand_ids):
    """Demand ids grouped by (kind, source node), in deterministic order."""
    groups = defaultdict(list)
    for d in demand_ids:
        dm = demands[d]
        groups[(dm.kind, cgn.source_node(dm))].append(d)
    return sorted(groups.items())


def price_all(cgn: ChangeGoNetwork, duals, demands, thresholds, kind: str | None = None,
              jobs: int = 1, tol: float = RC_TOL) -> list[PricedPath]:
    groups = [(k, src, ids) for (k, src), ids in group_by_source(cgn, demands, sorted(thresholds))
              if kind is None or k == kind]

    def work(item):
        _, src, ids = item
        return price_source(cgn, duals, src, ids, demands, thresholds, tol)

    if jobs > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, groups))
    else:
        results = [work(g) for g in groups]
    found = []
    for res in results:
        for d in sorted(res):
            if res[d] is not None:
                found.append(res[d])
    return found
