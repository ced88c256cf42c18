"""Linear programming backend.

Problems are stated as ``max c'x  s.t.  A x <= b,  lo <= x <= hi`` and solved
with the HiGHS dual simplex shipped with scipy. Row duals are reported in the
sign convention of the maximization (nonnegative for binding ``<=`` rows).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERIC = "numeric"

_STATUS = {0: OPTIMAL, 1: NUMERIC, 2: INFEASIBLE, 3: UNBOUNDED, 4: NUMERIC}


@dataclass
class LpProblem:
    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    rows: csr_matrix
    rhs: np.ndarray
    var_labels: list = field(default_factory=list)
    row_labels: list = field(default_factory=list)

    @classmethod
    def from_triplets(cls, objective, lower, upper, entries, rhs, var_labels=None, row_labels=None):
        """Build from ``(row, col, value)`` triplets; duplicate entries are summed."""
        n, m = len(objective), len(rhs)
        if entries:
            r, c, v = zip(*entries)
        else:
            r, c, v = (), (), ()
        A = csr_matrix((np.asarray(v, float), (np.asarray(r, int), np.asarray(c, int))), shape=(m, n))
        return cls(np.asarray(objective, float), np.asarray(lower, float), np.asarray(upper, float),
                   A, np.asarray(rhs, float), list(var_labels or []), list(row_labels or []))

    def validate(self):
        n = len(self.objective)
        if self.rows.shape != (len(self.rhs), n):
            raise ValueError("row matrix shape mismatch")
        if len(self.lower) != n or len(self.upper) != n:
            raise ValueError("bound length mismatch")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound above upper bound")
        for arr in (self.objective, self.rhs, self.rows.data):
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite coefficient")


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    objective: float = math.nan

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def solve_lp(p: LpProblem) -> LpSolution:
    p.validate()
    n = len(p.objective)
    if n == 0:
        if np.any(p.rhs < -1e-9):
            return LpSolution(INFEASIBLE)
        return LpSolution(OPTIMAL, np.zeros(0), np.zeros(len(p.rhs)), 0.0)
    bounds = np.column_stack([p.lower, np.where(np.isinf(p.upper), np.inf, p.upper)])
    kwargs = {}
    if len(p.rhs):
        kwargs = {"A_ub": p.rows, "b_ub": p.rhs}
    res = linprog(-p.objective, bounds=bounds, method="highs-ds", **kwargs)
    status = _STATUS.get(res.status, NUMERIC)
    if status != OPTIMAL:
        return LpSolution(status)
    duals = -np.asarray(res.ineqlin.marginals) if len(p.rhs) else np.zeros(0)
    return LpSolution(OPTIMAL, np.asarray(res.x), duals, float(p.objective @ res.x))


def write_lp_format(p: LpProblem, fh) -> None:
    """Export in CPLEX LP text format for cross-checking with external solvers."""
    names = [f"x{j}" for j in range(len(p.objective))]

    def terms(pairs):
        parts = []
        for j, v in pairs:
            if v == 0:
                continue
            parts.append(f"{'-' if v < 0 else '+'} {abs(v):.12g} {names[j]}")
        return " ".join(parts) if parts else "0 x0"

    fh.write("\\ exported by railplan\nMaximize\n obj: ")
    fh.write(terms(enumerate(p.objective)) + "\nSubject To\n")
    A = p.rows.tocsr()
    for i in range(A.shape[0]):
        lo, hi = A.indptr[i], A.indptr[i + 1]
        fh.write(f" r{i}: {terms(zip(A.indices[lo:hi], A.data[lo:hi]))} <= {p.rhs[i]:.12g}\n")
    fh.write("Bounds\n")
    for j, name in enumerate(names):
        hi = "+inf" if math.isinf(p.upper[j]) else f"{p.upper[j]:.12g}"
        fh.write(f" {p.lower[j]:.12g} <= {name} <= {hi}\n")
    fh.write("End\n")
