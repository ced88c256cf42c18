"""Restricted master problem over the current path columns.

Variables are the line frequencies (one per pool line) followed by one flow
variable per column. Rows, in order: demand caps, passenger capacity per
travel arc, freight capacity per travel arc, throughput per (track, period),
and optional periodic coupling rows.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .cgn import TRAVEL, ChangeGoNetwork, duration_threshold, fastest_path, path_rules
from .lp import LpProblem, LpSolution, solve_lp
from .network import DemandEntry

log = logging.getLogger(__name__)


class DuplicateColumnError(ValueError):
    pass


class MasterSolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class Column:
    demand: int
    arcs: tuple[int, ...]
    duration: int
    travel_arcs: tuple[int, ...]

    @property
    def key(self):
        return (self.demand, tuple(sorted(self.arcs)))


@dataclass
class DualPrices:
    alpha: np.ndarray  # per demand (passenger and freight share the index space)
    delta: np.ndarray  # per arc id, passenger capacity rows
    epsilon: np.ndarray  # per arc id, freight capacity rows

    def demand_dual(self, d: int) -> float:
        return float(self.alpha[d])


@dataclass
class MasterSolution:
    objective: float
    x: np.ndarray
    flows: np.ndarray
    duals: DualPrices
    lp: LpSolution = field(repr=False, default=None)


class MasterState:
    def __init__(self, cgn: ChangeGoNetwork, demands: list[DemandEntry], thresholds: dict,
                 periodic: bool = False):
        self.cgn = cgn
        self.demands = demands
        self.thresholds = thresholds
        self.periodic = periodic
        self.columns: list[Column] = []
        self._keys: set = set()
        self.n_lines = len(cgn.pool)
        self.unservable = [i for i in range(len(demands)) if i not in thresholds]

        L = self.n_lines
        self.lower = np.zeros(L)
        self.upper = np.full(L, np.inf)
        self.obj = [-ln.cost for ln in cgn.pool]
        self.entries = []
        self.rhs = []
        self.row_labels = []

        self.demand_row = []
        for i, dm in enumerate(demands):
            self.demand_row.append(self._row(("demand", i), dm.quantity))
        self.pax_row, self.frt_row = {}, {}
        travel = [a for a in cgn.arcs if a.kind == TRAVEL]
        for a in travel:
            r = self._row(("pax_cap", a.id), 0.0)
            self.pax_row[a.id] = r
            self.entries.append((r, a.line, -a.passenger_capacity))
        for a in travel:
            r = self._row(("frt_cap", a.id), 0.0)
            self.frt_row[a.id] = r
            self.entries.append((r, a.line, -a.freight_capacity))
        self.throughput_row = {}
        for key, lines in sorted(cgn.track_period_lines.items()):
            lam = cgn.throughput_limit(key)
            r = self._row(("throughput", key), lam)
            self.throughput_row[key] = r
            for l in lines:
                self.entries.append((r, l, 1.0))
                self.upper[l] = min(self.upper[l], lam)
        if periodic:
            groups = defaultdict(list)
            for ln in cgn.pool:
                groups[(ln.route.id, ln.mode.id)].append(ln.id)
            for ids in groups.values():
                for other in ids[1:]:
                    r = self._row(("periodic", ids[0], other), 0.0)
                    self.entries += [(r, ids[0], 1.0), (r, other, -1.0)]
                    r = self._row(("periodic", other, ids[0]), 0.0)
                    self.entries += [(r, other, 1.0), (r, ids[0], -1.0)]

    def _row(self, label, rhs) -> int:
        self.row_labels.append(label)
        self.rhs.append(rhs)
        return len(self.rhs) - 1

    # -- columns -----------------------------------------------------------
    def make_column(self, demand: int, arcs) -> Column:
        arcs = tuple(arcs)
        travel = tuple(a for a in arcs if self.cgn.arcs[a].kind == TRAVEL)
        return Column(demand, arcs, self.cgn.path_duration(arcs), travel)

    def has_column(self, col: Column) -> bool:
        return col.key in self._keys

    def add_column(self, col: Column, check: bool = False) -> int:
        """Append a path column; returns its LP variable index."""
        if col.key in self._keys:
            raise DuplicateColumnError(f"duplicate column for demand {col.demand}")
        if check:
            dm = self.demands[col.demand]
            bad = path_rules(self.cgn, col.arcs, dm, self.thresholds.get(col.demand, -1))
            if bad:
                raise ValueError(f"invalid column: {bad}")
        var = self.n_lines + len(self.columns)
        self._keys.add(col.key)
        self.columns.append(col)
        dm = self.demands[col.demand]
        self.obj.append(dm.unit_revenue)
        self.entries.append((self.demand_row[col.demand], var, 1.0))
        caprow = self.pax_row if dm.is_passenger else self.frt_row
        for a in col.travel_arcs:
            self.entries.append((caprow[a], var, 1.0))
        return var

    # -- bounds ------------------------------------------------------------
    def fix_line(self, line: int, value: float) -> None:
        self.lower[line] = value
        self.upper[line] = value

    def fixed_lines(self) -> dict[int, float]:
        return {l: self.lower[l] for l in range(self.n_lines) if self.lower[l] == self.upper[l]}

    # -- solve -------------------------------------------------------------
    def problem(self) -> LpProblem:
        lower = np.concatenate([self.lower, np.zeros(len(self.columns))])
        upper = np.concatenate([self.upper, np.full(len(self.columns), np.inf)])
        cached = getattr(self, "_lp_cache", None)
        if cached is not None and cached[0] == len(self.entries):
            base = cached[1]
        else:
            base = LpProblem.from_triplets(self.obj, lower, upper, self.entries, self.rhs,
                                           row_labels=self.row_labels)
            self._lp_cache = (len(self.entries), base)
        return LpProblem(base.objective, lower, upper, base.rows, base.rhs,
                         base.var_labels, base.row_labels)

    def solve(self) -> MasterSolution:
        lp = solve_lp(self.problem())
        if not lp.optimal:
            raise MasterSolveError(f"master LP status {lp.status}")
        L = self.n_lines
        narcs = len(self.cgn.arcs)
        y = np.clip(lp.duals, 0.0, None)
        alpha = y[np.asarray(self.demand_row, int)] if self.demand_row else np.zeros(0)
        delta = np.zeros(narcs)
        eps = np.zeros(narcs)
        for aid, r in self.pax_row.items():
            delta[aid] = y[r]
        for aid, r in self.frt_row.items():
            eps[aid] = y[r]
        return MasterSolution(lp.objective, lp.x[:L].copy(), lp.x[L:].copy(),
                              DualPrices(alpha, delta, eps), lp)

    def profit(self, x, flows) -> float:
        """Objective recomputed from frequencies and flows."""
        rev = sum(self.demands[c.demand].unit_revenue * f for c, f in zip(self.columns, flows))
        return rev - sum(ln.cost * x[ln.id] for ln in self.cgn.pool)

    def copy(self) -> "MasterState":
        other = object.__new__(MasterState)
        other.__dict__.update(self.__dict__)
        other.columns = list(self.columns)
        other._keys = set(self._keys)
        other.lower = self.lower.copy()
        other.upper = self.upper.copy()
        other.obj = list(self.obj)
        other.entries = list(self.entries)
        return other


def compute_thresholds(cgn: ChangeGoNetwork, demands: list[DemandEntry]):
    """Duration thresholds and minimal-time paths for every servable demand."""
    thresholds, fastest = {}, {}
    for i, dm in enumerate(demands):
        res = fastest_path(cgn, cgn.source_node(dm), cgn.sink_nodes(dm), dm.kind)
        if res is None:
            continue
        thresholds[i] = duration_threshold(cgn, dm, res[0])
        fastest[i] = res[1]
    return thresholds, fastest


def init_master(cgn: ChangeGoNetwork, demands: list[DemandEntry], periodic: bool = False) -> MasterState:
    """Master with one minimal-travel-time column per servable demand."""
    thresholds, fastest = compute_thresholds(cgn, demands)
    ms = MasterState(cgn, demands, thresholds, periodic)
    for i in sorted(fastest):
        col = ms.make_column(i, fastest[i])
        if not ms.has_column(col):
            ms.add_column(col)
    if ms.unservable:
        log.info("%d demand(s) unservable", len(ms.unservable))
    return ms
