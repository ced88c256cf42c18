"""Independent feasibility check of integer line plans.

Works from the raw pool, network and path data only; it never consults the
LP that produced the solution.
"""
from __future__ import annotations

from collections import defaultdict

from .cgn import TRAVEL, ChangeGoNetwork, path_rules

TOL = 1e-6


def check_solution(cgn: ChangeGoNetwork, demands, thresholds, columns, flows, x,
                   tol: float = TOL) -> list[str]:
    """Violations of demand caps, arc capacities, throughput and integrality."""
    problems = []
    if len(x) != len(cgn.pool):
        return [f"frequency vector has {len(x)} entries, pool has {len(cgn.pool)}"]
    for ln in cgn.pool:
        v = x[ln.id]
        if v < 0 or abs(v - round(v)) > 1e-9:
            problems.append(f"integrality: line {ln.id} frequency {v} not a nonnegative integer")

    served = defaultdict(float)
    pax_load = defaultdict(float)
    frt_load = defaultdict(float)
    for col, f in zip(columns, flows):
        if f < -tol:
            problems.append(f"negative flow {f} on a column of demand {col.demand}")
        if f <= tol:
            continue
        dm = demands[col.demand]
        bad = path_rules(cgn, col.arcs, dm, thresholds.get(col.demand, -1.0))
        if bad:
            problems.append(f"column of demand {col.demand} breaks path rules: {bad}")
        served[col.demand] += f
        load = pax_load if dm.is_passenger else frt_load
        for aid in col.arcs:
            if cgn.arcs[aid].kind == TRAVEL:
                load[aid] += f

    for d, q in served.items():
        if q > demands[d].quantity + tol:
            problems.append(f"demand cap: {demands[d].kind} demand {d} served {q} > {demands[d].quantity}")
    for aid, q in pax_load.items():
        a = cgn.arcs[aid]
        if q > a.passenger_capacity * x[a.line] + tol:
            problems.append(f"capacity: arc {aid} passenger load {q} > capacity")
    for aid, q in frt_load.items():
        a = cgn.arcs[aid]
        if q > a.freight_capacity * x[a.line] + tol:
            problems.append(f"capacity: arc {aid} freight load {q} > capacity")

    use = defaultdict(float)
    for ln in cgn.pool:
        if x[ln.id]:
            for key in cgn.line_track_keys(ln):
                use[key] += x[ln.id]
    for key, q in sorted(use.items()):
        if q > cgn.throughput_limit(key) + tol:
            problems.append(f"throughput: track {key} uses {q} > {cgn.throughput_limit(key)}")
    return problems
