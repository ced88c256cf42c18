"""Candidate line routes and the line pool (route x period x mode)."""
from __future__ import annotations

from dataclasses import dataclass

from .config import Params
from .network import PhysicalNetwork, round_half_up

ALL_STATIONS = "all-stations"
TERMINALS_ONLY = "terminals-only"


class PoolTooLargeError(RuntimeError):
    pass


@dataclass(frozen=True)
class Mode:
    id: str
    passenger_capacity: float
    freight_capacity: float

    def __post_init__(self):
        if not (self.passenger_capacity > 0 or self.freight_capacity > 0):
            raise ValueError(f"mode {self.id} has no capacity")


# 8 carriages x 100 units; mixed trains split capacity in half
PASSENGER_TRAIN = Mode("passenger", 800, 0)
FREIGHT_TRAIN = Mode("freight", 0, 800)
MIXED_TRAIN = Mode("mixed", 400, 400)
DEFAULT_MODES = {m.id: m for m in (PASSENGER_TRAIN, FREIGHT_TRAIN, MIXED_TRAIN)}

SCENARIOS = {
    "P": ("passenger",),
    "P+F": ("passenger", "freight"),
    "P+F+M": ("passenger", "freight", "mixed"),
}


@dataclass(frozen=True)
class LineRoute:
    """A directed station sequence plus the subset of stations where it halts."""
    id: str
    stations: tuple[str, ...]
    stops: tuple[str, ...]
    scheme: str = ALL_STATIONS

    @property
    def tracks(self) -> tuple[tuple[str, str], ...]:
        """Undirected track keys traversed, in route order."""
        return tuple((u, v) if u <= v else (v, u) for u, v in zip(self.stations, self.stations[1:]))

    def segments(self):
        """Yield (stop_i, stop_j, stations between them inclusive) for consecutive stops."""
        idx = [self.stations.index(s) for s in self.stops]
        for a, b in zip(idx, idx[1:]):
            yield self.stations[a], self.stations[b], self.stations[a:b + 1]


@dataclass(frozen=True)
class Line:
    id: int
    route: LineRoute
    period: str
    mode: Mode
    duration: int  # minutes
    cost: float

    @property
    def name(self) -> str:
        return f"{self.route.id}|{self.period}|{self.mode.id}"


def running_minutes(km: float, params: Params) -> int:
    return round_half_up(km / params.speed_kmh * 60.0)


def segment_minutes(net: PhysicalNetwork, stations, params: Params) -> int:
    return sum(running_minutes(net.track_between(u, v).km, params)
               for u, v in zip(stations, stations[1:]))


def line_duration(net: PhysicalNetwork, route: LineRoute, params: Params) -> int:
    run = segment_minutes(net, route.stations, params)
    return run + params.dwell_min * max(len(route.stops) - 2, 0)


def make_route(net: PhysicalNetwork, stations, scheme: str = ALL_STATIONS) -> LineRoute:
    stations = tuple(stations)
    if scheme == ALL_STATIONS:
        stops = stations
    elif scheme == TERMINALS_ONLY:
        terms = set(net.terminals)
        stops = tuple(s for i, s in enumerate(stations)
                      if s in terms or i in (0, len(stations) - 1))
    else:
        raise ValueError(f"unknown stop scheme {scheme!r}")
    rid = "-".join(stations) if scheme == ALL_STATIONS else "-".join(stations) + "/T"
    return LineRoute(rid, stations, stops, scheme)


def _simple_paths(adj, src, dst):
    path = [src]
    on_path = {src}

    def rec(u):
        if u == dst:
            yield tuple(path)
            return
        for v, _ in adj.get(u, ()):
            if v not in on_path:
                path.append(v)
                on_path.add(v)
                yield from rec(v)
                on_path.discard(v)
                path.pop()

    yield from rec(src)


def enumerate_routes(net: PhysicalNetwork, schemes=(ALL_STATIONS,), max_routes: int = 10_000) -> list[LineRoute]:
    """All simple terminal-to-terminal paths, both directions, per stop scheme.

    Routes whose stop sequences coincide across schemes are kept once.
    """
    adj = net.adjacency()
    terms = sorted(net.terminals)
    paths = []
    for s in terms:
        for t in terms:
            if s != t:
                paths.extend(_simple_paths(adj, s, t))
    paths.sort()
    order = [sc for sc in (ALL_STATIONS, TERMINALS_ONLY) if sc in set(schemes)]
    routes = []
    for p in paths:
        seen_stops = set()
        for sc in order:
            r = make_route(net, p, sc)
            if r.stops in seen_stops:
                continue
            seen_stops.add(r.stops)
            routes.append(r)
            if len(routes) > max_routes:
                raise PoolTooLargeError(f"more than {max_routes} routes")
    return routes


def build_pool(net: PhysicalNetwork, routes, periods, modes, params: Params | None = None) -> list[Line]:
    params = params or Params()
    pool = []
    for period in periods:
        for route in routes:
            dur = line_duration(net, route, params)
            cost = params.unit_cost_per_hour * dur / 60.0
            for mode in modes:
                pool.append(Line(len(pool), route, period, mode, dur, cost))
    return pool


def pool_records(pool: list[Line]) -> list[dict]:
    return [
        {"id": ln.id, "route": ln.route.id, "stops": list(ln.route.stops), "period": ln.period,
         "mode": ln.mode.id, "cost": ln.cost, "duration_min": ln.duration}
        for ln in pool
    ]
