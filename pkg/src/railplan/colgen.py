"""Column generation loop around the restricted master."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from .cgn import FREIGHT, PASSENGER
from .config import RC_TOL
from .master import MasterSolution, MasterState
from .pricing import price_all

log = logging.getLogger(__name__)

EXACT = "exact"
EARLY_STOP = "early-stop"


@dataclass(frozen=True)
class ColgenConfig:
    mode: str = EXACT
    rc_tol: float = RC_TOL
    max_nonimproving: int = 5
    improve_tol: float = 1e-6
    max_iterations: int = 10_000
    time_limit: float | None = None
    jobs: int = 1

    def __post_init__(self):
        if self.mode not in (EXACT, EARLY_STOP):
            raise ValueError(f"unknown colgen mode {self.mode!r}")
        if not (self.rc_tol > 0 and self.improve_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_nonimproving < 1 or self.max_iterations < 1:
            raise ValueError("caps must be at least 1")


@dataclass
class ColgenStats:
    objectives: list = field(default_factory=list)
    added: list = field(default_factory=list)
    passenger_time: float = 0.0
    freight_time: float = 0.0
    converged: bool = False
    bound_proven: bool = False
    stop_reason: str = ""

    @property
    def iterations(self) -> int:
        return len(self.objectives)

    @property
    def columns_added(self) -> int:
        return sum(self.added)

    def log_lines(self):
        for i, (obj, n) in enumerate(zip(self.objectives, self.added)):
            yield {"iteration": i + 1, "objective": obj, "columns_added": n}


def run_colgen(ms: MasterState, cgn=None, cfg: ColgenConfig | None = None, trace=None):
    """Alternate master solves and pricing until no improving column remains.

    ``cgn`` may be a reduced copy of the master's network; pricing then runs
    on it. Returns the last master solution and the stats.
    """
    cfg = cfg or ColgenConfig()
    cgn = cgn or ms.cgn
    stats = ColgenStats()
    t0 = time.monotonic()
    nonimproving = 0
    prev = None
    for kind in (PASSENGER, FREIGHT):
        cgn.out_arcs(kind)
    while True:
        sol = ms.solve()
        stats.objectives.append(sol.objective)
        if prev is not None:
            nonimproving = nonimproving + 1 if sol.objective - prev < cfg.improve_tol else 0
        prev = sol.objective
        if cfg.mode == EARLY_STOP and nonimproving >= cfg.max_nonimproving:
            stats.added.append(0)
            stats.stop_reason = "nonimproving"
            break
        if stats.iterations >= cfg.max_iterations:
            stats.added.append(0)
            stats.stop_reason = "iteration-cap"
            break
        if cfg.time_limit is not None and time.monotonic() - t0 > cfg.time_limit:
            stats.added.append(0)
            stats.stop_reason = "time-cap"
            break

        t = time.monotonic()
        found = price_all(cgn, sol.duals, ms.demands, ms.thresholds, PASSENGER, cfg.jobs, cfg.rc_tol)
        stats.passenger_time += time.monotonic() - t
        t = time.monotonic()
        found += price_all(cgn, sol.duals, ms.demands, ms.thresholds, FREIGHT, cfg.jobs, cfg.rc_tol)
        stats.freight_time += time.monotonic() - t

        n = 0
        for p in found:
            col = ms.make_column(p.demand, p.arcs)
            if not ms.has_column(col):
                ms.add_column(col)
                n += 1
        stats.added.append(n)
        if trace is not None:
            trace({"iteration": stats.iterations, "objective": sol.objective, "columns_added": n})
        if n == 0:
            stats.converged = True
            stats.stop_reason = "converged"
            break
    stats.bound_proven = stats.converged
    log.debug("colgen: %d iterations, %d columns, obj %.6f", stats.iterations,
              stats.columns_added, sol.objective)
    return sol, stats
