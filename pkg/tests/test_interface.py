import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rcinterface.interface import (Interface, InadmissibleFamily, NotInI, WallFamily, bump,
                                   check_admissible, check_properties, classify, close, decompose,
                                   displacement, extract_interface, flat, group, h_to_infinity,
                                   omega_bar, reconstruct, relative_key, rho, standard_interface,
                                   standardize)
from rcinterface.lattice import Box, EdgeConfiguration, crossing_exists, mu
from rcinterface.mc import ChainState
from rcinterface.plaquettes import Adjacency, adjacency


def extract_oracle(omega):
    """Brute-force flood over 1-adjacency using pairwise corner tests."""
    box = omega.box
    R = box.L + 2
    H = box.M + 1

    def is_open(h):
        i = box.edge_index.get(h)
        return (mu(h) == 0) if i is None else not omega.bits[i]

    cand = [(x, y, z, a) for x in range(-R - 1, R + 1) for y in range(-R - 1, R + 1)
            for z in range(-H - 1, H + 1) for a in range(3)]
    opened = {h for h in cand if abs(h[0]) <= R and abs(h[1]) <= R and is_open(h)}
    seeds = [flat((x, y)) for x in range(-R, R + 1) for y in range(-R, R + 1)
             if max(abs(x), abs(y)) == box.L + 1]
    seen = set(seeds)
    todo = list(seeds)
    while todo:
        h = todo.pop()
        for g in opened:
            if g not in seen and abs(g[0] - h[0]) <= 1 and abs(g[1] - h[1]) <= 1 \
                    and abs(g[2] - h[2]) <= 1 and adjacency(h, g) == Adjacency.ONE:
                seen.add(g)
                todo.append(g)
    return seen


def bump_omega(box):
    """Close the five edges around (0,0,1) except the one below; open (0,0,0)-(0,0,1)."""
    om = EdgeConfiguration.maximal(box, box.regular_edges())
    for e in [(0, 0, 1, 0), (-1, 0, 1, 0), (0, 0, 1, 1), (0, -1, 1, 1), (0, 0, 1, 2)]:
        om.bits[box.edge_index[e]] = False
    om.bits[box.edge_index[(0, 0, 0, 2)]] = True
    return om


def sampled(seed, L=3, p=0.85, q=2.0, sweeps=40):
    st_ = ChainState(Box(L, L), p, q, seed)
    st_.run(sweeps)
    return st_.omega


# ---------------------------------------------------------------- extraction

def test_regular_extraction():
    box = Box(2, 2)
    d = extract_interface(EdgeConfiguration.maximal(box, box.regular_edges()))
    assert d == Interface.regular()
    cl = classify(d)
    assert not cl.walls and len(cl.ceilings) == 1


def test_bump_extraction():
    d = extract_interface(bump_omega(Box(2, 2)))
    assert d == bump((0, 0))
    assert d.missing == {(0, 0)}
    assert (0, 0, 1, 2) in d and len(d.extra) == 5


def test_crossing_rejected():
    box = Box(1, 1)
    with pytest.raises(NotInI):
        extract_interface(EdgeConfiguration.all_open(box))


@given(st.integers(0, 2**31 - 1))
def test_extraction_matches_oracle(seed):
    om = sampled(seed, L=1, p=0.75, sweeps=15)
    d = extract_interface(om)
    R = om.box.L + 2
    got = d.materialize((-R, -R), (R, R))
    assert got == extract_oracle(om)


@given(st.integers(0, 2**31 - 1))
def test_interface_edges_closed_and_omega_bar_in_I(seed):
    om = sampled(seed)
    d = extract_interface(om)
    box = om.box
    for h in d.materialize(*d.window(include=[(box.L, box.L), (-box.L, -box.L)])):
        assert om[h] == 0
    bar = omega_bar(box, d)
    assert not crossing_exists(bar)
    assert om <= bar
    assert extract_interface(bar) == d


def test_flat_count_in_box():
    box = Box(3, 3)
    d = Interface.regular()
    inside = [h for h in d.materialize((-5, -5), (5, 5)) if h in box.edge_index]
    assert len(inside) == (2 * box.L + 1) ** 2


# ------------------------------------------------------------ classification

def test_bump_wall():
    d = bump((0, 0))
    cl = classify(d)
    assert len(cl.walls) == 1 and len(cl.ceilings) == 1
    W = cl.walls[0]
    assert len(W.plaquettes) == 14
    assert W.height == 1
    assert check_properties(d, cl) == []
    S = standardize(W)
    assert (len(S.A), len(S.B), S.N, len(S.pi), S.Pi, S.D) == (9, 5, 9, 5, 4, 1)
    assert S.origin == (-1, 0)
    assert S.inequalities() == []


def test_bump_observables():
    d = bump((0, 0))
    assert displacement((0, 0), d) == 1
    assert displacement((2, 0), d) == 0
    assert displacement((0, 0), bump((0, 0), up=False)) == 1
    fails = {(x, y) for x in range(-3, 4) for y in range(-3, 4) if not h_to_infinity(d, (x, y), 3)}
    assert fails == {(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}
    assert all(h_to_infinity(Interface(), (x, y), 2) for x in range(-2, 3) for y in range(-2, 3))


def test_rho():
    d = bump((0, 0))
    assert rho((0, 0), d) == 5
    assert rho((1, 0), d) == 2
    assert all(rho((x, y), Interface()) == 1 for x in range(-2, 3) for y in range(-2, 3))


def test_standard_interface_round_trip():
    S = decompose(bump((0, 0))).walls[(-1, 0)]
    assert standard_interface(S) == bump((0, 0))


def test_downward_bump_round_trip():
    d = bump((1, -1), up=False)
    assert reconstruct(decompose(d)) == d
    assert check_properties(d) == []


# -------------------------------------------------------------------- groups

def two_bumps(dx):
    a, b = bump((0, 0)), bump((dx, 0))
    return Interface(a.extra | b.extra, a.missing | b.missing)


def test_groups_near_and_far():
    near = decompose(two_bumps(4))
    assert len(near.walls) == 2 and len(group(near)) == 1
    far = decompose(two_bumps(10))
    assert len(far.walls) == 2 and len(group(far)) == 2
    S1, S2 = far.walls.values()
    assert not close(S1, S2)


def test_adjacent_bumps_merge_into_one_wall():
    # bumps on neighbouring cells share w-plaquettes, so they are one wall, not two
    fam = decompose(two_bumps(1))
    assert len(fam.walls) == 1


def test_inadmissible_family():
    S = decompose(bump((0, 0))).walls[(-1, 0)]
    T = decompose(bump((1, 0))).walls[(0, 0)]
    with pytest.raises(InadmissibleFamily) as err:
        reconstruct(WallFamily({S.origin: S, T.origin: T}))
    assert err.value.clause == "i"


def test_relative_key_orders_by_distance():
    key = relative_key((0, 0))
    assert sorted([(3, 0), (-1, 1), (0, 0)], key=key) == [(0, 0), (-1, 1), (3, 0)]


# --------------------------------------------------------- sampled properties

@given(st.integers(0, 2**31 - 1), st.sampled_from([0.8, 0.9]), st.sampled_from([1.0, 2.0]))
def test_bijection_and_properties(seed, p, q):
    d = extract_interface(sampled(seed, p=p, q=q))
    cl = classify(d)
    assert check_properties(d, cl) == []
    fam = decompose(d, L=3)
    for S in fam.walls.values():
        assert S.inequalities() == []
    check_admissible(fam)
    assert reconstruct(fam) == d


@given(st.integers(0, 2**31 - 1))
def test_decompose_after_dropping_a_wall(seed):
    d = extract_interface(sampled(seed, p=0.8))
    fam = decompose(d)
    if not fam.walls:
        return
    keys = sorted(fam.walls)
    drop = keys[seed % len(keys)]
    sub = WallFamily({k: v for k, v in fam.walls.items() if k != drop})
    try:
        e = reconstruct(sub)
    except InadmissibleFamily:
        return
    assert decompose(e) == sub


@given(st.integers(0, 2**31 - 1))
def test_group_partition(seed):
    d = extract_interface(sampled(seed, p=0.8))
    fam = decompose(d)
    gs = group(fam)
    members = [S.origin for g in gs.values() for S in g.walls]
    assert sorted(members) == sorted(fam.walls)
    for o, g in gs.items():
        assert o == min(S.origin for S in g.walls)
    groups = list(gs.values())
    for g1, g2 in itertools.combinations(groups, 2):
        assert not any(close(a, b) for a in g1.walls for b in g2.walls)


def test_json_round_trip(tmp_path):
    box = Box(2, 2)
    d = extract_interface(bump_omega(box))
    back, b2 = Interface.from_json(d.to_json(box))
    assert back == d and b2 == box
    back, b3 = Interface.from_json(d.to_json())
    assert back == d and b3 is None
    doc = json.loads(d.to_json(box))
    doc["dual_edges"].append([40, 0, 0, 2])
    with pytest.raises(ValueError):
        Interface.from_json(json.dumps(doc))
