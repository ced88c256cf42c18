"""Synthetic instances: desk-scale networks and randomized OD demand.

Expected demand per OD pair comes from a station-class table in carriages.
It is split into passenger and freight shares, perturbed uniformly within
per-kind bands, converted to units and, for passengers, allocated over the
morning-peak / off-peak / evening-peak periods by the peak ratio R.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import (DemandEntry, Period, PhysicalNetwork, Station, Track, round_half_up,
                      shortest_physical_distance)

_CLASSES = ("major", "intermediate", "small", "minor")


def _table(rows):
    return {(a, b): rows[i][j] for i, a in enumerate(_CLASSES) for j, b in enumerate(_CLASSES)}


MEDIUM_TABLE = _table([[24, 20, 16, 12], [20, 16, 12, 8], [16, 12, 8, 4], [12, 8, 4, 2]])
LARGE_TABLE = _table([[24, 16, 12, 8], [16, 12, 8, 6], [12, 8, 6, 2], [8, 6, 2, 2]])

# OD-pair counts per demand level on the 24-station medium network (552 pairs)
MEDIUM_LEVEL_ODS = (100, 150, 200, 250, 300, 350, 400, 450, 500, 552)

PASSENGER_RATE = 0.7  # CNY per km and passenger
FREIGHT_RATE = 0.2  # CNY per km and freight unit


@dataclass
class GenSpec:
    net: PhysicalNetwork
    table: dict = field(default_factory=lambda: dict(MEDIUM_TABLE))
    passenger_share: float = 0.70
    passenger_band: float = 0.10
    freight_band: float = 0.05
    ratio: float = 1.0
    carriage_units: int = 100
    passenger_rate: float = PASSENGER_RATE
    freight_rate: float = FREIGHT_RATE
    level: int = 10
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.passenger_share <= 1.0:
            raise ValueError("passenger_share must lie in [0, 1]")
        if not self.ratio > 0:
            raise ValueError("ratio must be positive")
        if not 1 <= self.level <= 10:
            raise ValueError("level must be in 1..10")
        for (a, b), v in self.table.items():
            if self.table.get((b, a)) != v:
                raise ValueError(f"demand table not symmetric for {a}/{b}")


def allocate_periods(q: int, ratio: float) -> tuple[int, int, int]:
    """Split ``q`` over (M-peak, off-peak, E-peak) as R:1:R, largest remainder."""
    if q < 0 or not ratio > 0:
        raise ValueError("need q >= 0 and ratio > 0")
    shares = (ratio / (2 * ratio + 1), 1 / (2 * ratio + 1), ratio / (2 * ratio + 1))
    raw = [q * s for s in shares]
    out = [math.floor(r + 1e-9) for r in raw]
    left = q - sum(out)
    order = sorted(range(3), key=lambda i: (-(raw[i] - out[i]), i))
    for i in order[:left]:
        out[i] += 1
    return tuple(out)


def fare(spec: GenSpec, o: str, d: str, kind: str) -> float:
    if o == d:
        raise ValueError("origin equals destination")
    km = shortest_physical_distance(spec.net, o, d)
    rate = spec.passenger_rate if kind == "passenger" else spec.freight_rate
    return rate * km


def level_od_count(n_pairs: int, level: int) -> int:
    return max(1, round(n_pairs * MEDIUM_LEVEL_ODS[level - 1] / MEDIUM_LEVEL_ODS[-1]))


def sample_carriages(rng, expected: float, spec: GenSpec) -> tuple[float, float]:
    pax = expected * spec.passenger_share
    frt = expected - pax
    pax *= 1.0 + rng.uniform(-spec.passenger_band, spec.passenger_band)
    frt *= 1.0 + rng.uniform(-spec.freight_band, spec.freight_band)
    return pax, frt


def generate_demands(spec: GenSpec) -> list[DemandEntry]:
    net = spec.net
    periods = net.period_ids
    if len(periods) != 3:
        raise ValueError("period allocation needs exactly three periods (M-peak, off-peak, E-peak)")
    for s in net.stations:
        if s.cls not in _CLASSES:
            raise ValueError(f"station {s.id} has no class")
    pairs = [(a.id, b.id) for a in net.stations for b in net.stations if a.id != b.id]
    rng = np.random.default_rng(spec.seed)
    k = level_od_count(len(pairs), spec.level)
    if k < len(pairs):
        chosen = sorted(rng.choice(len(pairs), size=k, replace=False).tolist())
        pairs = [pairs[i] for i in chosen]
    out = []
    for o, d in pairs:
        co, cd = net.station(o).cls, net.station(d).cls
        if (co, cd) not in spec.table:
            raise ValueError(f"no expected demand for classes {co}/{cd}")
        pax_c, frt_c = sample_carriages(rng, spec.table[(co, cd)], spec)
        pax = round_half_up(pax_c * spec.carriage_units)
        frt = round_half_up(frt_c * spec.carriage_units)
        pfare = fare(spec, o, d, "passenger")
        for period, q in zip(periods, allocate_periods(pax, spec.ratio)):
            if q > 0:
                out.append(DemandEntry("passenger", o, d, q, pfare, period))
        if frt > 0:
            out.append(DemandEntry("freight", o, d, frt, fare(spec, o, d, "freight")))
    return out


# ---------------------------------------------------------------------------
# Desk networks (stylized; not the real topology)
# ---------------------------------------------------------------------------

DAY_PERIODS = [Period("M-peak", 8, 12), Period("off-peak", 12, 16), Period("E-peak", 16, 20)]


def _net(stations, tracks):
    return PhysicalNetwork([Station(*s) for s in stations], [Track(*t) for t in tracks],
                           list(DAY_PERIODS))


def small_network() -> PhysicalNetwork:
    """8-station ring with three terminals."""
    stations = [
        ("NJN", "Nanjing Nan", "major", True),
        ("CZ", "Changzhou", "small", False),
        ("WX", "Wuxi", "intermediate", False),
        ("SZ", "Suzhou", "major", False),
        ("SHHQ", "Shanghaihongqiao", "major", True),
        ("JXN", "Jiaxing Nan", "intermediate", False),
        ("HZD", "Hangzhou Dong", "major", True),
        ("HUZ", "Huzhou", "small", False),
    ]
    tracks = [("NJN", "CZ", 135), ("CZ", "WX", 45), ("WX", "SZ", 45), ("SZ", "SHHQ", 85),
              ("SHHQ", "JXN", 85), ("JXN", "HZD", 80), ("HZD", "HUZ", 75), ("HUZ", "NJN", 180)]
    return _net(stations, tracks)


def medium_network() -> PhysicalNetwork:
    """14-station network with four terminals: a ring plus a spur."""
    stations = [
        ("NJN", "Nanjing Nan", "major", True),
        ("ZJ", "Zhenjiang", "small", False),
        ("DY", "Danyang", "small", False),
        ("CZ", "Changzhou", "small", False),
        ("WX", "Wuxi", "intermediate", False),
        ("SZ", "Suzhou", "major", False),
        ("KSN", "Kunshan Nan", "intermediate", False),
        ("SH", "Shanghai", "major", True),
        ("SHHQ", "Shanghaihongqiao", "major", True),
        ("JXN", "Jiaxing Nan", "intermediate", False),
        ("HZD", "Hangzhou Dong", "major", True),
        ("HUZ", "Huzhou", "small", False),
        ("YX", "Yixing", "small", False),
        ("JN", "Jiangning", "small", False),
    ]
    tracks = [("NJN", "ZJ", 65), ("ZJ", "DY", 25), ("DY", "CZ", 35), ("CZ", "WX", 45),
              ("WX", "SZ", 45), ("SZ", "KSN", 30), ("KSN", "SH", 50), ("KSN", "SHHQ", 45),
              ("SHHQ", "JXN", 85), ("JXN", "HZD", 80), ("HZD", "HUZ", 75), ("HUZ", "YX", 60),
              ("YX", "JN", 90), ("JN", "NJN", 25)]
    return _net(stations, tracks)


NETWORKS = {"small": small_network, "medium": medium_network}
