"""Managerial metrics of an integer line plan and scenario comparison."""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field, fields

from .audit import check_solution
from .cgn import TRAVEL
from .heuristics import gap as gap_percent

CSV_SCHEMA = "1.0"


class InfeasibleSolutionError(ValueError):
    pass


@dataclass
class MetricsReport:
    profit: float
    revenue: float
    line_cost: float
    passenger_sl: float | None
    freight_sl: float | None
    passenger_sl_by_period: dict = field(default_factory=dict)
    passenger_tt: float | None = None  # hours
    freight_tt: float | None = None
    passenger_util: float | None = None
    freight_util: float | None = None
    passenger_util_weighted: float | None = None
    freight_util_weighted: float | None = None
    passenger_util_by_period: dict = field(default_factory=dict)
    installed_lines: int = 0
    total_frequency: int = 0
    mode_share: dict = field(default_factory=dict)  # % of installed frequency
    bound: float | None = None
    gap: float | None = None

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _pct(num, den):
    return None if den <= 0 else 100.0 * num / den


def compute_metrics(cgn, demands, thresholds, columns, flows, x, bound=None) -> MetricsReport:
    """Metrics of a feasible integer plan; infeasible input is rejected."""
    problems = check_solution(cgn, demands, thresholds, columns, flows, x)
    if problems:
        raise InfeasibleSolutionError(problems[0])

    served = defaultdict(float)
    tt_sum = {"passenger": 0.0, "freight": 0.0}
    load = {"passenger": defaultdict(float), "freight": defaultdict(float)}
    for col, f in zip(columns, flows):
        if f <= 0:
            continue
        dm = demands[col.demand]
        served[col.demand] += f
        tt_sum[dm.kind] += f * col.duration
        for aid in col.travel_arcs:
            load[dm.kind][aid] += f

    revenue = sum(demands[c.demand].unit_revenue * f for c, f in zip(columns, flows))
    line_cost = sum(ln.cost * x[ln.id] for ln in cgn.pool)

    totals = {"passenger": 0.0, "freight": 0.0}
    got = {"passenger": 0.0, "freight": 0.0}
    per_period_tot, per_period_got = defaultdict(float), defaultdict(float)
    for i, dm in enumerate(demands):
        totals[dm.kind] += dm.quantity
        got[dm.kind] += served[i]
        if dm.is_passenger:
            per_period_tot[dm.period] += dm.quantity
            per_period_got[dm.period] += served[i]

    def util(kind, period=None):
        ratios, num, den = [], 0.0, 0.0
        for a in cgn.arcs:
            if a.kind != TRAVEL or not x[a.line]:
                continue
            if period is not None and cgn.lines[a.line].period != period:
                continue
            cap = a.capacity(kind) * x[a.line]
            if cap <= 0:
                continue
            ratios.append(load[kind][a.id] / cap)
            num += load[kind][a.id]
            den += cap
        if not ratios:
            return None, None
        return 100.0 * sum(ratios) / len(ratios), 100.0 * num / den

    pu, puw = util("passenger")
    fu, fuw = util("freight")
    freq_by_mode = defaultdict(int)
    for ln in cgn.pool:
        freq_by_mode[ln.mode.id] += int(x[ln.id])
    total_freq = sum(freq_by_mode.values())
    rep = MetricsReport(
        profit=revenue - line_cost,
        revenue=revenue,
        line_cost=line_cost,
        passenger_sl=_pct(got["passenger"], totals["passenger"]),
        freight_sl=_pct(got["freight"], totals["freight"]),
        passenger_sl_by_period={p: _pct(per_period_got[p], per_period_tot[p])
                                for p in cgn.period_ids if per_period_tot[p] > 0},
        passenger_tt=None if got["passenger"] <= 0 else tt_sum["passenger"] / got["passenger"] / 60.0,
        freight_tt=None if got["freight"] <= 0 else tt_sum["freight"] / got["freight"] / 60.0,
        passenger_util=pu, freight_util=fu,
        passenger_util_weighted=puw, freight_util_weighted=fuw,
        passenger_util_by_period={p: util("passenger", p)[0] for p in cgn.period_ids},
        installed_lines=sum(1 for ln in cgn.pool if x[ln.id] > 0),
        total_frequency=total_freq,
        mode_share={m: 100.0 * v / total_freq for m, v in sorted(freq_by_mode.items())}
        if total_freq else {},
        bound=bound,
    )
    if bound is not None:
        rep.gap = gap_percent(bound, rep.profit)
    return rep


def profit_improvement(base: MetricsReport, variant: MetricsReport) -> float:
    if not base.profit > 0:
        raise ValueError("undefined baseline: base profit must be positive")
    return 100.0 * (variant.profit - base.profit) / base.profit


CSV_COLUMNS = [
    "instance", "scenario", "plan", "method", "ratio", "lp_bound", "profit", "gap",
    "passenger_sl", "freight_sl", "passenger_tt", "freight_tt",
    "passenger_util", "freight_util", "passenger_util_weighted", "freight_util_weighted",
    "installed_lines", "total_frequency", "share_passenger", "share_freight", "share_mixed",
]


def _fmt(v):
    if v is None:
        return "n/a"
    if isinstance(v, float):
        return repr(round(v, 9))
    return str(v)


def csv_text(rows: list[dict]) -> str:
    """CSV with a schema comment line followed by the fixed column order."""
    buf = io.StringIO()
    buf.write(f"# schema_version={CSV_SCHEMA}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def csv_row(report: MetricsReport, **keys) -> dict:
    row = dict(keys)
    row.update({k: getattr(report, k) for k in (
        "profit", "gap", "passenger_sl", "freight_sl", "passenger_tt", "freight_tt",
        "passenger_util", "freight_util", "passenger_util_weighted", "freight_util_weighted",
        "installed_lines", "total_frequency")})
    for m in ("passenger", "freight", "mixed"):
        row[f"share_{m}"] = report.mode_share.get(m, 0.0 if report.mode_share else None)
    return row
