"""End-to-end pipeline: pool, network, master bound and an integer plan."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .cgn import ChangeGoNetwork, build_cgn
from .colgen import EARLY_STOP, EXACT, ColgenConfig, ColgenStats, run_colgen
from .config import Params
from .heuristics import IntegerSolution, dive, price_and_branch
from .line_pool import ALL_STATIONS, DEFAULT_MODES, SCENARIOS, TERMINALS_ONLY, build_pool, enumerate_routes
from .master import MasterState, init_master
from .network import DemandEntry, PhysicalNetwork


def scenario_demands(demands: list[DemandEntry], scenario: str) -> list[DemandEntry]:
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    if scenario == "P":
        return [d for d in demands if d.is_passenger]
    return list(demands)


def build_network(net: PhysicalNetwork, scenario: str, params: Params,
                  schemes=(ALL_STATIONS, TERMINALS_ONLY)) -> ChangeGoNetwork:
    modes = [DEFAULT_MODES[m] for m in SCENARIOS[scenario]]
    routes = enumerate_routes(net, schemes)
    pool = build_pool(net, routes, net.period_ids, modes, params)
    return build_cgn(net, pool, params)


@dataclass
class SolveResult:
    cgn: ChangeGoNetwork
    demands: list[DemandEntry]
    master: MasterState
    bound: float
    bound_stats: ColgenStats
    solution: IntegerSolution | None = None
    trace: list = field(default_factory=list)


def solve_bound(net, demands, scenario="P+F+M", plan="MP", params=None, jobs=1,
                time_limit=None, schemes=(ALL_STATIONS, TERMINALS_ONLY), trace=None) -> SolveResult:
    """LP bound of the master problem by exact column generation."""
    params = params or Params()
    if plan not in ("MP", "PE"):
        raise ValueError(f"unknown plan {plan!r}")
    used = scenario_demands(demands, scenario)
    cgn = build_network(net, scenario, params, schemes)
    ms = init_master(cgn, used, periodic=(plan == "PE"))
    sol, stats = run_colgen(ms, cgn, ColgenConfig(mode=EXACT, jobs=jobs, time_limit=time_limit),
                            trace=trace)
    return SolveResult(cgn, used, ms, sol.objective, stats)


def solve(net, demands, scenario="P+F+M", method="diving", plan="MP", params=None, jobs=1,
          time_limit=None, mip_time_limit=1800.0, schemes=(ALL_STATIONS, TERMINALS_ONLY),
          trace=None) -> SolveResult:
    res = solve_bound(net, demands, scenario, plan, params, jobs, time_limit, schemes, trace)
    if method == "diving":
        ms = res.master.copy()
        res.solution = dive(ms, ColgenConfig(mode=EARLY_STOP, jobs=jobs), bound=res.bound,
                            time_limit=time_limit)
    elif method == "pnb":
        res.solution = price_and_branch(res.master, time_limit=mip_time_limit)
        res.solution.bound = res.bound
    else:
        raise ValueError(f"unknown method {method!r}")
    return res
