import numpy as np
import pytest
from hypothesis import given, strategies as st

from rcinterface.lattice import (Box, EdgeConfiguration, crossing_exists, edge_centre2,
                                 endpoints, make_edge, mu)

from conftest import bfs_crossing


def test_edge_counts():
    # E_{L,M}: edges with at least one endpoint in the box
    assert Box(0, 1).n_edges == 16
    assert Box(1, 1).n_edges == 108
    for L, M in [(0, 1), (1, 2), (2, 1)]:
        b = Box(L, M)
        brute = set()
        for x in b.vertices():
            for a in range(3):
                for s in (1, -1):
                    y = list(x)
                    y[a] += s
                    brute.add(make_edge(x, tuple(y)))
        assert brute == set(b.edges)


def test_mu_only_flat_verticals_closed():
    assert mu((3, -2, 0, 2)) == 0
    assert mu((0, 0, 1, 2)) == 1
    assert mu((0, 0, 0, 0)) == 1


@given(st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5)), st.integers(0, 2),
       st.sampled_from([1, -1]))
def test_make_edge_canonical(x, a, s):
    y = list(x)
    y[a] += s
    e = make_edge(x, tuple(y))
    assert make_edge(tuple(y), x) == e
    assert set(endpoints(e)) == {x, tuple(y)}
    c = edge_centre2(e)
    assert c == tuple(x[i] + y[i] for i in range(3))


def test_make_edge_rejects_far_pair():
    with pytest.raises(ValueError):
        make_edge((0, 0, 0), (1, 1, 0))


def test_supernodes_and_ids():
    b = Box(1, 2)
    assert b.TOP == b.n_vertices and b.BOTTOM == b.n_vertices + 1
    for i in range(b.n_vertices):
        assert b.vertex_id(b.vertex(i)) == i
    assert b.vertex_id((5, 0, 1)) == b.TOP
    assert b.vertex_id((5, 0, 0)) == b.BOTTOM


def test_regular_configuration_has_no_crossing():
    b = Box(2, 2)
    flat = EdgeConfiguration.maximal(b, b.regular_edges())
    assert not crossing_exists(flat)
    assert crossing_exists(EdgeConfiguration.all_open(b))
    # all closed: exterior still separated by the closed flat verticals outside
    assert not crossing_exists(EdgeConfiguration.all_closed(b))


@given(st.integers(0, 2**31 - 1), st.floats(0.3, 0.95))
def test_crossing_matches_padded_bfs(seed, p):
    b = Box(1, 1)
    bits = np.random.default_rng(seed).random(b.n_edges) < p
    om = EdgeConfiguration(b, bits)
    assert crossing_exists(om) == bfs_crossing(om)


@given(st.integers(0, 2**31 - 1))
def test_order_and_copy(seed):
    b = Box(1, 1)
    r = np.random.default_rng(seed)
    a = EdgeConfiguration(b, r.random(b.n_edges) < 0.5)
    c = a.copy()
    c.bits |= r.random(b.n_edges) < 0.5
    assert a <= c
    assert a == a.copy()
    assert c.cluster_count() <= a.cluster_count()


def test_getitem_outside_is_mu():
    b = Box(1, 1)
    om = EdgeConfiguration.all_closed(b)
    assert om[(9, 9, 0, 2)] == 0
    assert om[(9, 9, 3, 0)] == 1
    assert om[(0, 0, 0, 0)] == 0


def test_bit_shape_checked():
    with pytest.raises(ValueError):
        EdgeConfiguration(Box(1, 1), np.zeros(3, dtype=bool))
