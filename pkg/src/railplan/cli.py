"""Command-line interface: gen, solve, report, compare."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import time
from pathlib import Path

from .config import Params
from .heuristics import BoundViolationError, gap as gap_percent
from .instance_gen import NETWORKS, GenSpec, allocate_periods, generate_demands
from .cgn import TRAVEL
from .master import Column, compute_thresholds
from .network import (SCHEMA_VERSION, DemandEntry, SchemaError, check_schema_version,
                      dumps_instance, instance_from_dict, load_instance)
from .reporting import InfeasibleSolutionError, compute_metrics, csv_row, csv_text
from .solver import build_network, scenario_demands, solve

log = logging.getLogger("railplan")


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.network.startswith("custom:"):
        net, _, _ = load_instance(args.network[len("custom:"):])
    elif args.network in NETWORKS:
        net = NETWORKS[args.network]()
    else:
        raise CliError("bad-network", f"unknown network {args.network!r}")
    spec = GenSpec(net, ratio=args.ratio, level=args.level, seed=args.seed)
    demands = generate_demands(spec)
    meta = {"network": args.network, "seed": args.seed, "level": args.level, "ratio": args.ratio}
    text = dumps_instance(net, demands, meta)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# solve / report
# ---------------------------------------------------------------------------

def solution_document(res, instance_doc, scenario, plan, params: Params) -> dict:
    sol = res.solution
    cgn = res.cgn
    lines = []
    for ln in cgn.pool:
        if sol.x[ln.id]:
            lines.append({"id": ln.id, "route": ln.route.id, "stops": list(ln.route.stops),
                          "period": ln.period, "mode": ln.mode.id, "frequency": sol.x[ln.id]})
    flows = []
    for col, f in zip(sol.columns, sol.flows):
        if f > 1e-9:
            flows.append({"demand": col.demand, "arcs": list(col.arcs),
                          "nodes": [cgn.nodes[cgn.arcs[col.arcs[0]].tail].label()]
                          + [cgn.nodes[cgn.arcs[a].head].label() for a in col.arcs],
                          "duration_min": col.duration, "flow": f})
    return {
        "schema_version": SCHEMA_VERSION,
        "method": sol.method,
        "scenario": scenario,
        "plan": plan,
        "params": params.to_dict(),
        "objective": sol.objective,
        "bound": res.bound,
        "bound_proven": res.bound_stats.bound_proven,
        "gap": gap_percent(res.bound, sol.objective),
        "proven_optimal": sol.proven,
        "status": sol.status,
        "lines": lines,
        "flows": flows,
        "instance": instance_doc,
    }


def metrics_from_document(doc: dict):
    check_schema_version(doc["schema_version"])
    net, demands, _ = instance_from_dict(doc["instance"])
    params = Params.from_dict(doc["params"])
    used = scenario_demands(demands, doc["scenario"])
    cgn = build_network(net, doc["scenario"], params)
    thresholds, _ = compute_thresholds(cgn, used)
    x = [0] * len(cgn.pool)
    for rec in doc["lines"]:
        ln = cgn.lines.get(rec["id"])
        if ln is None or ln.route.id != rec["route"] or ln.period != rec["period"] \
                or ln.mode.id != rec["mode"]:
            raise CliError("bad-solution", f"line {rec['id']} does not match the rebuilt pool")
        x[ln.id] = rec["frequency"]
    columns, flows = [], []
    for rec in doc["flows"]:
        arcs = tuple(rec["arcs"])
        if any(not 0 <= a < len(cgn.arcs) for a in arcs):
            raise CliError("bad-solution", "arc id out of range")
        travel = tuple(a for a in arcs if cgn.arcs[a].kind == TRAVEL)
        columns.append(Column(rec["demand"], arcs, cgn.path_duration(arcs), travel))
        flows.append(rec["flow"])
    report = compute_metrics(cgn, used, thresholds, columns, flows, x, bound=doc["bound"])
    return report


def _metrics_json(report) -> dict:
    return report.to_dict()


def cmd_solve(args) -> int:
    params = Params()
    with open(args.instance) as fh:
        try:
            instance_doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CliError("bad-instance", str(exc)) from None
    net, demands, _ = instance_from_dict(instance_doc)
    out = Path(args.out)
    trace_lines = []
    t0 = time.monotonic()
    res = solve(net, demands, args.scenario, args.method, args.plan, params, jobs=args.jobs,
                time_limit=args.time_limit,
                mip_time_limit=args.time_limit if args.time_limit is not None else 1800.0,
                trace=trace_lines.append if args.trace else None)
    wall = time.monotonic() - t0
    doc = solution_document(res, instance_doc, args.scenario, args.plan, params)
    report = metrics_from_document(doc)
    doc["metrics"] = _metrics_json(report)
    write_atomic(out / "solution.json", _dump_json(doc))
    ratio = instance_doc.get("meta", {}).get("ratio")
    row = csv_row(report, instance=Path(args.instance).name, scenario=args.scenario,
                  plan=args.plan, method=args.method, ratio=ratio, lp_bound=res.bound)
    write_atomic(out / "metrics.csv", csv_text([row]))
    if args.trace:
        write_atomic(out / "trace.jsonl", "".join(json.dumps(r) + "\n" for r in trace_lines))
    write_atomic(out / "timing.json", _dump_json({"wall_time_s": wall,
                                                  "passenger_pricing_s": res.bound_stats.passenger_time,
                                                  "freight_pricing_s": res.bound_stats.freight_time}))
    print(json.dumps({"objective": doc["objective"], "bound": doc["bound"], "gap": doc["gap"]}))
    return 0


def cmd_report(args) -> int:
    with open(args.solution) as fh:
        doc = json.load(fh)
    report = metrics_from_document(doc)
    metrics = _metrics_json(report)
    sys.stdout.write(_dump_json(metrics))
    embedded = doc.get("metrics")
    if embedded is not None and json.loads(json.dumps(metrics)) != embedded:
        raise CliError("metrics-mismatch", "recomputed metrics differ from embedded metrics")
    return 0


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def reallocate(demands: list[DemandEntry], periods: list[str], ratio: float) -> list[DemandEntry]:
    """Passenger totals per OD re-split over the three periods with peak ratio ``ratio``."""
    totals, fares, order = {}, {}, []
    freight = []
    for dm in demands:
        if dm.is_passenger:
            key = (dm.origin, dm.destination)
            if key not in totals:
                order.append(key)
                totals[key] = 0
            totals[key] += dm.quantity
            fares[key] = dm.unit_revenue
        else:
            freight.append(dm)
    out = []
    for key in order:
        for period, q in zip(periods, allocate_periods(int(totals[key]), ratio)):
            if q > 0:
                out.append(DemandEntry("passenger", key[0], key[1], q, fares[key], period))
    return out + freight


def cmd_compare(args) -> int:
    net, demands, _ = load_instance(args.instance)
    if len(net.periods) != 3:
        raise CliError("bad-instance", "compare needs exactly three periods")
    params = Params()
    ratios = [float(r) for r in args.ratios.split(",")]
    scenarios = args.scenarios.split(",")
    rows = []
    for ratio in ratios:
        dem_r = reallocate(demands, net.period_ids, ratio)
        for scenario in scenarios:
            for plan in ("MP", "PE"):
                res = solve(net, dem_r, scenario, args.method, plan, params, jobs=args.jobs)
                sol = res.solution
                cols = [c for c, f in zip(sol.columns, sol.flows) if f > 1e-9]
                flows = [f for f in sol.flows if f > 1e-9]
                thresholds = res.master.thresholds
                report = compute_metrics(res.cgn, res.demands, thresholds, cols, flows, sol.x,
                                         bound=res.bound)
                rows.append(csv_row(report, instance=Path(args.instance).name, scenario=scenario,
                                    plan=plan, method=args.method, ratio=ratio,
                                    lp_bound=res.bound))
    text = csv_text(rows)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="railplan", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic instance")
    g.add_argument("--network", default="medium", help="medium | small | custom:<file>")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--level", type=int, default=1)
    g.add_argument("--ratio", type=float, default=1.0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--scenario", default="P+F+M", choices=["P", "P+F", "P+F+M"])
    s.add_argument("--method", default="diving", choices=["diving", "pnb"])
    s.add_argument("--plan", default="MP", choices=["MP", "PE"])
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--time-limit", type=float, default=None, help="seconds")
    s.add_argument("--trace", action="store_true")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("report", help="recompute metrics from a solution file")
    r.add_argument("--solution", required=True)
    r.set_defaults(func=cmd_report)

    c = sub.add_parser("compare", help="scenario x plan x ratio matrix")
    c.add_argument("--instance", required=True)
    c.add_argument("--ratios", default="1,1.5,2")
    c.add_argument("--scenarios", default="P,P+F,P+F+M")
    c.add_argument("--method", default="diving", choices=["diving", "pnb"])
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        code, msg = exc.code, str(exc)
    except (SchemaError, InfeasibleSolutionError, BoundViolationError, ValueError, KeyError) as exc:
        code, msg = type(exc).__name__, str(exc)
    except OSError as exc:
        code, msg = "io-error", str(exc)
    sys.stderr.write(json.dumps({"error": code, "message": msg}) + "\n")
    return 2


if __name__ == "__main__":
    sys.exit(main())
