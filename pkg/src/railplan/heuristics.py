"""Integer line plans: diving with column generation, and price-and-branch."""
from __future__ import annotations

import heapq
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .colgen import EARLY_STOP, ColgenConfig, run_colgen
from .config import INT_TOL
from .master import MasterSolveError, MasterState

log = logging.getLogger(__name__)


class BoundViolationError(RuntimeError):
    """An incumbent exceeded the upper bound it is compared against."""


@dataclass
class IntegerSolution:
    method: str
    x: list[int]
    columns: list
    flows: list[float]
    objective: float
    bound: float | None = None
    proven: bool = False
    status: str = "ok"
    nodes: int = 0
    rounds: int = 0
    history: list = field(default_factory=list)

    @property
    def gap(self) -> float | None:
        return None if self.bound is None else gap(self.bound, self.objective)


def gap(upper: float, value: float) -> float:
    """Relative optimality gap in percent.

    A value above ``upper`` by more than max(1e-6, 1e-9 |upper|) is reported
    as a bound violation.
    """
    if value > upper + max(1e-6, 1e-9 * abs(upper)):
        raise BoundViolationError(f"incumbent {value} exceeds bound {upper}")
    if abs(upper) <= 1e-9:
        return 0.0 if value >= -1e-6 else 100.0
    return max(0.0, 100.0 * (1.0 - value / upper))


def nearest_nonzero_integer(v: float) -> int:
    return max(1, int(math.floor(v + 0.5)))


def _distance(v: float) -> float:
    return abs(v - nearest_nonzero_integer(v))


def pick_fixing(x, candidates) -> int:
    """Line whose value is closest to a non-zero integer; ties go to the larger
    value, then the smaller line id."""
    return min(candidates, key=lambda l: (_distance(x[l]), -x[l], l))


def _residual(ms: MasterState, line: int) -> float:
    """Throughput left for ``line`` given the other fixed frequencies."""
    cgn = ms.cgn
    fixed = ms.fixed_lines()
    res = math.inf
    for key in cgn.line_track_keys(cgn.lines[line]):
        used = sum(fixed.get(l, 0.0) for l in cgn.track_period_lines[key] if l != line)
        res = min(res, cgn.throughput_limit(key) - used)
    return res


def _exhausted_lines(ms: MasterState) -> set[int]:
    cgn = ms.cgn
    fixed = ms.fixed_lines()
    out = set()
    for key, lines in cgn.track_period_lines.items():
        used = sum(fixed.get(l, 0.0) for l in lines)
        if used >= cgn.throughput_limit(key) - INT_TOL:
            out.update(l for l in lines if l not in fixed)
    return out


def _final_solution(ms: MasterState, method: str, x_values) -> tuple[list[int], object]:
    for l, v in enumerate(x_values):
        if ms.lower[l] != ms.upper[l]:
            ms.fix_line(l, float(round(v)))
    sol = ms.solve()
    return [int(round(v)) for v in ms.lower], sol


def dive(ms: MasterState, cfg: ColgenConfig | None = None, bound: float | None = None,
         time_limit: float | None = None) -> IntegerSolution:
    """Diving heuristic: fix one frequency per round, then resume column generation.

    ``ms`` is modified in place (bounds fixed, columns added).
    """
    cfg = cfg or ColgenConfig(mode=EARLY_STOP)
    t0 = time.monotonic()
    cgn = ms.cgn
    L = ms.n_lines
    disabled = set()
    reduced = cgn
    sol = ms.solve()
    history = [sol.objective]
    rounds = 0
    while True:
        x = sol.x
        frac = [l for l in range(L)
                if ms.lower[l] != ms.upper[l] and abs(x[l] - round(x[l])) > INT_TOL]
        if not frac:
            break
        if time_limit is not None and time.monotonic() - t0 > time_limit:
            log.info("diving time limit reached; rounding down remaining lines")
            for l in frac:
                ms.fix_line(l, float(math.floor(x[l])))
            sol = ms.solve()
            break
        line = pick_fixing(x, frac)
        v = x[line]
        room = math.floor(_residual(ms, line) + INT_TOL)
        ladder = []
        for cand in (nearest_nonzero_integer(v), math.floor(v), max(0, min(room, math.floor(v)))):
            if cand <= room and cand not in ladder:
                ladder.append(cand)
        if not ladder:
            ladder = [0]
        saved = (ms.lower.copy(), ms.upper.copy())
        for value in ladder:
            ms.lower[:], ms.upper[:] = saved
            ms.fix_line(line, float(value))
            for l in _exhausted_lines(ms):
                ms.fix_line(l, 0.0)
            disabled = {l for l in range(L) if ms.upper[l] == 0.0}
            reduced = cgn.without_lines(disabled)
            try:
                sol, _ = run_colgen(ms, reduced, cfg)
                break
            except MasterSolveError:
                log.warning("fixing line %d to %d infeasible; trying next value", line, value)
        else:
            raise MasterSolveError("no feasible fixing value")
        rounds += 1
        history.append(sol.objective)
        log.debug("dive round %d: line %d -> %d, obj %.4f", rounds, line, value, sol.objective)

    x_int, sol = _final_solution(ms, "diving", sol.x)
    status = "ok"
    if sol.objective < 0:
        # the all-zero plan is always feasible and earns nothing
        log.info("diving plan loses money (%.4f); returning the zero plan", sol.objective)
        for l in range(L):
            ms.fix_line(l, 0.0)
        sol = ms.solve()
        x_int = [0] * L
        status = "zero-plan"
    res = IntegerSolution("diving", x_int, list(ms.columns), [float(f) for f in sol.flows],
                          float(sol.objective), bound, status=status, rounds=rounds,
                          history=history)
    res.disabled_lines = sorted(disabled)
    return res


def _most_fractional(x, lower, upper):
    best, score = None, INT_TOL
    for l, v in enumerate(x):
        if lower[l] == upper[l]:
            continue
        f = v - math.floor(v)
        s = min(f, 1.0 - f)
        if s > score + 1e-12:
            best, score = l, s
    return best


def price_and_branch(ms: MasterState, time_limit: float | None = 1800.0,
                     tol: float = 1e-7) -> IntegerSolution:
    """Branch-and-bound on the frequency variables over the frozen column set.

    Depth-first, ties broken by the better LP bound; no pricing in the tree.
    """
    work = ms.copy()
    t0 = time.monotonic()
    base_lo, base_hi = ms.lower.copy(), ms.upper.copy()
    L = ms.n_lines
    inc_obj, inc_x = -math.inf, None
    nodes = 0
    seq = 0
    heap = []

    def evaluate(lo, hi, depth):
        nonlocal nodes, seq, inc_obj, inc_x
        work.lower[:], work.upper[:] = lo, hi
        nodes += 1
        try:
            sol = work.solve()
        except MasterSolveError:
            return None
        if sol.objective <= inc_obj + tol:
            return sol
        l = _most_fractional(sol.x, lo, hi)
        if l is None:
            inc_obj, inc_x = sol.objective, np.round(sol.x)
            return sol
        heapq.heappush(heap, (-depth, -sol.objective, seq, lo.copy(), hi.copy(), sol.x.copy()))
        seq += 1
        return sol

    root = evaluate(base_lo.copy(), base_hi.copy(), 0)
    bound = None if root is None else root.objective
    timed_out = False
    while heap:
        if time_limit is not None and time.monotonic() - t0 > time_limit:
            timed_out = True
            break
        depth, negobj, _, lo, hi, x = heapq.heappop(heap)
        if -negobj <= inc_obj + tol:
            continue
        l = _most_fractional(x, lo, hi)
        v = x[l]
        down_hi = hi.copy()
        down_hi[l] = math.floor(v)
        up_lo = lo.copy()
        up_lo[l] = math.ceil(v)
        evaluate(lo.copy(), down_hi, -depth + 1)
        if up_lo[l] <= hi[l]:
            evaluate(up_lo, hi.copy(), -depth + 1)

    status = "ok"
    if inc_x is None:
        inc_x = np.zeros(L)
        status = "no-incumbent"
    work.lower[:], work.upper[:] = base_lo, base_hi
    x_int, sol = _final_solution(work, "pnb", inc_x)
    res = IntegerSolution("pnb", x_int, list(work.columns), [float(f) for f in sol.flows],
                          float(sol.objective), bound, proven=not timed_out, status=status,
                          nodes=nodes)
    return res
