import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from railplan.instance_gen import (LARGE_TABLE, MEDIUM_LEVEL_ODS, MEDIUM_TABLE, NETWORKS, GenSpec,
                                   allocate_periods, fare, generate_demands, level_od_count,
                                   sample_carriages)
from railplan.network import (Period, PhysicalNetwork, Station, Track, validate_demands,
                              validate_network)


def test_allocate_golden():
    assert allocate_periods(100, 2) == (40, 20, 40)
    assert allocate_periods(99, 1) == (33, 33, 33)
    assert allocate_periods(100, 1.5) == (38, 25, 37)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 100_000), st.sampled_from([0.5, 1, 1.5, 2, 2.5, 3, 4.2]))
def test_allocate_sums_and_proportions(q, r):
    out = allocate_periods(q, r)
    assert sum(out) == q
    shares = (r / (2 * r + 1), 1 / (2 * r + 1), r / (2 * r + 1))
    assert all(abs(o - q * s) < 1 for o, s in zip(out, shares))


def test_allocate_rejects_bad_ratio():
    with pytest.raises(ValueError):
        allocate_periods(10, 0)


def test_table_values():
    assert MEDIUM_TABLE[("major", "major")] == 24
    assert MEDIUM_TABLE[("major", "intermediate")] == 20
    assert LARGE_TABLE[("major", "major")] == 24
    assert all(MEDIUM_TABLE[(a, b)] == MEDIUM_TABLE[(b, a)] for a, b in MEDIUM_TABLE)


def test_band_example_major_intermediate():
    spec = GenSpec(NETWORKS["medium"]())
    rng = np.random.default_rng(0)
    for _ in range(1000):
        pax, frt = sample_carriages(rng, 20, spec)
        assert 12.6 - 1e-12 <= pax <= 15.4 + 1e-12
        assert 5.7 - 1e-12 <= frt <= 6.3 + 1e-12


def test_zero_band_is_exact():
    spec = GenSpec(NETWORKS["medium"](), passenger_band=0, freight_band=0)
    pax, frt = sample_carriages(np.random.default_rng(1), 20, spec)
    assert pax == pytest.approx(14) and frt == pytest.approx(6)


def test_fares():
    net = PhysicalNetwork([Station("a", "a", "major", True), Station("b", "b", "major", True)],
                          [Track("a", "b", 300.0)], [Period("P1", 8, 12)])
    spec = GenSpec(net)
    assert fare(spec, "a", "b", "passenger") == pytest.approx(210)
    assert fare(spec, "a", "b", "freight") == pytest.approx(60)
    with pytest.raises(ValueError):
        fare(spec, "a", "a", "passenger")


def test_level_counts():
    assert level_od_count(552, 10) == 552
    assert level_od_count(552, 1) == 100
    assert [level_od_count(552, k) for k in range(1, 11)] == list(MEDIUM_LEVEL_ODS)


@pytest.mark.parametrize("name", sorted(NETWORKS))
def test_desk_networks_valid(name):
    net = NETWORKS[name]()
    assert validate_network(net) == []
    assert len(net.periods) == 3


def test_generate_deterministic_and_valid():
    net = NETWORKS["small"]()
    a = generate_demands(GenSpec(net, seed=7, level=1, ratio=1.5))
    b = generate_demands(GenSpec(net, seed=7, level=1, ratio=1.5))
    c = generate_demands(GenSpec(net, seed=8, level=1, ratio=1.5))
    assert a == b and a != c
    assert validate_demands(net, a) == []
    n_pairs = len(net.stations) * (len(net.stations) - 1)
    ods = {(d.origin, d.destination) for d in a}
    assert len(ods) == level_od_count(n_pairs, 1)


def test_generated_quantities_in_band():
    net = NETWORKS["medium"]()
    spec = GenSpec(net, seed=3, level=10, ratio=2)
    dems = generate_demands(spec)
    pax_tot, frt = {}, {}
    for d in dems:
        key = (d.origin, d.destination)
        if d.is_passenger:
            pax_tot[key] = pax_tot.get(key, 0) + d.quantity
        else:
            frt[key] = d.quantity
    for (o, dd), q in pax_tot.items():
        e = spec.table[(net.station(o).cls, net.station(dd).cls)] * 100
        assert 0.7 * e * 0.9 - 0.5 <= q <= 0.7 * e * 1.1 + 0.5
        assert 0.3 * e * 0.95 - 0.5 <= frt[(o, dd)] <= 0.3 * e * 1.05 + 0.5
    by_key = {}
    for d in dems:
        if d.is_passenger:
            by_key.setdefault((d.origin, d.destination), []).append(d.quantity)
    for key, qs in by_key.items():
        if len(qs) == 3:
            assert tuple(qs) == allocate_periods(sum(qs), 2)


def test_spec_validation():
    net = NETWORKS["small"]()
    with pytest.raises(ValueError):
        GenSpec(net, passenger_share=1.2)
    with pytest.raises(ValueError):
        GenSpec(net, ratio=0)
    bad = dict(MEDIUM_TABLE)
    bad[("major", "minor")] = 99
    with pytest.raises(ValueError):
        GenSpec(net, table=bad)


def test_unclassed_station_rejected():
    net = NETWORKS["small"]()
    net.stations[0] = Station(net.stations[0].id, "x", "capital", True)
    with pytest.raises(ValueError):
        generate_demands(GenSpec(net))


def test_needs_three_periods():
    net = NETWORKS["small"]()
    net.periods = net.periods[:2]
    with pytest.raises(ValueError):
        generate_demands(GenSpec(net))
