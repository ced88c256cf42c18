"""Physical railway network, planning periods and demand records."""
from __future__ import annotations

import heapq
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP
from typing import Iterable

SCHEMA_VERSION = "1.0"
STATION_CLASSES = ("major", "intermediate", "small", "minor")


class NoPathError(ValueError):
    """Raised when two stations are not connected."""


class SchemaError(ValueError):
    """Raised for malformed or incompatible input files."""


def round_half_up(value: float) -> int:
    return int(Decimal(repr(value)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class Station:
    id: str
    name: str = ""
    cls: str = "minor"
    is_terminal: bool = False


@dataclass(frozen=True)
class Track:
    u: str
    v: str
    km: float

    @property
    def key(self) -> tuple[str, str]:
        return (self.u, self.v) if self.u <= self.v else (self.v, self.u)


@dataclass(frozen=True)
class Period:
    id: str
    start_hour: float
    end_hour: float

    @property
    def hours(self) -> float:
        return self.end_hour - self.start_hour


@dataclass(frozen=True)
class DemandEntry:
    kind: str  # "passenger" | "freight"
    origin: str
    destination: str
    quantity: float
    unit_revenue: float
    period: str | None = None

    @property
    def is_passenger(self) -> bool:
        return self.kind == "passenger"


@dataclass
class PhysicalNetwork:
    stations: list[Station]
    tracks: list[Track]
    periods: list[Period]
    _adj: dict = field(default=None, init=False, repr=False, compare=False)

    @property
    def station_ids(self) -> list[str]:
        return [s.id for s in self.stations]

    @property
    def terminals(self) -> list[str]:
        return [s.id for s in self.stations if s.is_terminal]

    @property
    def period_ids(self) -> list[str]:
        return [p.id for p in self.periods]

    def station(self, sid: str) -> Station:
        for s in self.stations:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def period(self, pid: str) -> Period:
        for p in self.periods:
            if p.id == pid:
                return p
        raise KeyError(pid)

    def adjacency(self) -> dict[str, list[tuple[str, float]]]:
        if self._adj is None:
            adj = defaultdict(list)
            for t in self.tracks:
                adj[t.u].append((t.v, t.km))
                adj[t.v].append((t.u, t.km))
            for nbrs in adj.values():
                nbrs.sort()
            self._adj = dict(adj)
        return self._adj

    def track_between(self, u: str, v: str) -> Track:
        key = (u, v) if u <= v else (v, u)
        for t in self.tracks:
            if t.key == key:
                return t
        raise KeyError(f"no track {u}-{v}")


def validate_network(net: PhysicalNetwork) -> list[str]:
    """Return a list of invariant violations; empty means the network is valid."""
    problems = []
    ids = net.station_ids
    known = set(ids)
    if len(known) != len(ids):
        problems.append("duplicate station id")
    for s in net.stations:
        if s.cls not in STATION_CLASSES:
            problems.append(f"unknown station class: {s.id} ({s.cls})")
    seen = set()
    for t in net.tracks:
        if t.u == t.v:
            problems.append(f"self-loop track: {t.u}-{t.v}")
            continue
        for end in (t.u, t.v):
            if end not in known:
                problems.append(f"unknown track endpoint: {end}")
        if t.key in seen:
            problems.append(f"parallel track: {t.u}-{t.v}")
        seen.add(t.key)
        if not t.km > 0:
            problems.append(f"non-positive track length: {t.u}-{t.v}")
    if len(net.terminals) < 2:
        problems.append("fewer than two terminals")
    if not net.periods:
        problems.append("no periods")
    for p in net.periods:
        if not p.end_hour > p.start_hour:
            problems.append(f"empty period: {p.id}")
    for a, b in zip(net.periods, net.periods[1:]):
        if b.start_hour != a.end_hour:
            problems.append(f"periods not contiguous: {a.id}->{b.id}")
    if ids and not any("unknown track endpoint" in p for p in problems):
        reach = _reachable(net, net.terminals[0] if net.terminals else ids[0])
        if reach != known:
            missing = sorted(known - reach)
            problems.append(f"disconnected: {', '.join(missing)}")
    return problems


def _reachable(net: PhysicalNetwork, start: str) -> set[str]:
    adj = net.adjacency()
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v, _ in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def shortest_physical_distance(net: PhysicalNetwork, o: str, d: str) -> float:
    """Shortest track-length distance in km between two stations."""
    known = set(net.station_ids)
    if o not in known or d not in known:
        raise KeyError(f"unknown station in pair {o}-{d}")
    if o == d:
        return 0.0
    adj = net.adjacency()
    dist = {o: 0.0}
    heap = [(0.0, o)]
    while heap:
        du, u = heapq.heappop(heap)
        if u == d:
            return du
        if du > dist[u]:
            continue
        for v, km in adj.get(u, ()):
            nd = du + km
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    raise NoPathError(f"no path {o}-{d}")


# ---------------------------------------------------------------------------
# Instance file
# ---------------------------------------------------------------------------

_STATION_FIELDS = {"id", "name", "class", "is_terminal"}
_TRACK_FIELDS = {"u", "v", "km"}
_PERIOD_FIELDS = {"id", "start_hour", "end_hour"}
_DEMAND_FIELDS = {"kind", "o", "d", "period", "qty", "unit_revenue"}
_TOP_FIELDS = {"schema_version", "meta", "stations", "tracks", "periods", "demands"}


def check_schema_version(version: str, current: str = SCHEMA_VERSION) -> None:
    try:
        major = int(str(version).split(".")[0])
    except ValueError:
        raise SchemaError(f"bad schema_version {version!r}") from None
    if major > int(current.split(".")[0]):
        raise SchemaError(f"schema_version {version} is newer than supported {current}")


def _check_fields(record: dict, allowed: set, where: str, required: Iterable[str] = ()):
    unknown = set(record) - allowed
    if unknown:
        raise SchemaError(f"unknown field(s) in {where}: {sorted(unknown)}")
    missing = [k for k in required if k not in record]
    if missing:
        raise SchemaError(f"missing field(s) in {where}: {missing}")


def instance_to_dict(net: PhysicalNetwork, demands: list[DemandEntry], meta: dict | None = None) -> dict:
    doc = {"schema_version": SCHEMA_VERSION}
    if meta:
        doc["meta"] = meta
    doc["stations"] = [
        {"id": s.id, "name": s.name, "class": s.cls, "is_terminal": s.is_terminal}
        for s in net.stations
    ]
    doc["tracks"] = [{"u": t.u, "v": t.v, "km": float(t.km)} for t in net.tracks]
    doc["periods"] = [
        {"id": p.id, "start_hour": float(p.start_hour), "end_hour": float(p.end_hour)} for p in net.periods
    ]
    rows = []
    for dm in demands:
        row = {"kind": dm.kind, "o": dm.origin, "d": dm.destination}
        if dm.period is not None:
            row["period"] = dm.period
        row["qty"] = dm.quantity
        row["unit_revenue"] = dm.unit_revenue
        rows.append(row)
    doc["demands"] = rows
    return doc


def instance_from_dict(doc: dict) -> tuple[PhysicalNetwork, list[DemandEntry], dict]:
    _check_fields(doc, _TOP_FIELDS, "instance", ("schema_version", "stations", "tracks", "periods"))
    check_schema_version(doc["schema_version"])
    stations = []
    for rec in doc["stations"]:
        _check_fields(rec, _STATION_FIELDS, "stations", ("id",))
        stations.append(Station(rec["id"], rec.get("name", ""), rec.get("class", "minor"),
                                bool(rec.get("is_terminal", False))))
    tracks = []
    for rec in doc["tracks"]:
        _check_fields(rec, _TRACK_FIELDS, "tracks", ("u", "v", "km"))
        tracks.append(Track(rec["u"], rec["v"], float(rec["km"])))
    periods = []
    for rec in doc["periods"]:
        _check_fields(rec, _PERIOD_FIELDS, "periods", ("id", "start_hour", "end_hour"))
        periods.append(Period(rec["id"], float(rec["start_hour"]), float(rec["end_hour"])))
    demands = []
    for rec in doc.get("demands", []):
        _check_fields(rec, _DEMAND_FIELDS, "demands", ("kind", "o", "d", "qty", "unit_revenue"))
        demands.append(DemandEntry(rec["kind"], rec["o"], rec["d"], rec["qty"],
                                   rec["unit_revenue"], rec.get("period")))
    net = PhysicalNetwork(stations, tracks, periods)
    problems = validate_network(net) + validate_demands(net, demands)
    if problems:
        raise SchemaError("invalid instance: " + "; ".join(problems))
    return net, demands, doc.get("meta", {})


def validate_demands(net: PhysicalNetwork, demands: list[DemandEntry]) -> list[str]:
    problems = []
    known = set(net.station_ids)
    pids = set(net.period_ids)
    for i, dm in enumerate(demands):
        if dm.kind not in ("passenger", "freight"):
            problems.append(f"demand {i}: unknown kind {dm.kind!r}")
        if dm.origin not in known or dm.destination not in known:
            problems.append(f"demand {i}: unknown station")
        if dm.origin == dm.destination:
            problems.append(f"demand {i}: origin equals destination")
        if not dm.quantity > 0:
            problems.append(f"demand {i}: non-positive quantity")
        if dm.unit_revenue < 0:
            problems.append(f"demand {i}: negative revenue")
        if dm.kind == "passenger" and dm.period not in pids:
            problems.append(f"demand {i}: passenger demand needs a valid period")
        if dm.kind == "freight" and dm.period is not None:
            problems.append(f"demand {i}: freight demand carries no period")
    return problems


def dumps_instance(net, demands, meta=None) -> str:
    return json.dumps(instance_to_dict(net, demands, meta), indent=1) + "\n"


def load_instance(path) -> tuple[PhysicalNetwork, list[DemandEntry], dict]:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not a JSON document: {exc}") from None
    return instance_from_dict(doc)
