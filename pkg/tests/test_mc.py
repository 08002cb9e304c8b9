import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from rcinterface import exact
from rcinterface.lattice import Box, EdgeConfiguration, crossing_exists
from rcinterface.mc import (BLOCK, CONNECTED, FORBIDDEN, SEPARATE, ChainState, SamplerConfig,
                            flat_start, sample, uniforms)


def graph_without(omega, e):
    box = omega.box
    u, v = box.ends
    G = nx.MultiGraph()
    G.add_nodes_from(range(box.n_nodes))
    for f in range(box.n_edges):
        if f != e and omega.bits[f]:
            G.add_edge(int(u[f]), int(v[f]))
    return G


def relation_oracle(omega, e):
    box = omega.box
    u, v = box.ends
    G = graph_without(omega, e)
    a, b = int(u[e]), int(v[e])
    ca, cb = nx.node_connected_component(G, a), nx.node_connected_component(G, b)
    if b in ca:
        return CONNECTED
    if (box.TOP in ca and box.BOTTOM in cb) or (box.BOTTOM in ca and box.TOP in cb):
        return FORBIDDEN
    return SEPARATE


def random_state_in_I(box, seed, steps=30):
    st_ = ChainState(box, 0.85, 2.0, seed)
    st_.run(steps)
    return st_


@given(st.integers(0, 2**31 - 1))
def test_probe_matches_networkx(seed):
    box = Box(1, 1)
    st_ = random_state_in_I(box, seed)
    for e in np.random.default_rng(seed).choice(box.n_edges, 20, replace=False):
        assert st_.relation(int(e)) == relation_oracle(st_.omega, int(e))


def weight(bits, model):
    o = int(bits.sum())
    return model.p ** o * (1 - model.p) ** (model.m - o) * model.q ** exact.cluster_count(bits, model)


@given(st.integers(0, 2**31 - 1), st.sampled_from([(0.6, 2.0), (0.9, 1.0), (0.8, 3.5)]))
def test_heat_bath_detailed_balance(seed, pq):
    p, q = pq
    box = Box(0, 1)
    model = exact.dobrushin_model(box, p, q)
    st_ = ChainState(box, p, q, seed)
    st_.run(5)
    rng = np.random.default_rng(seed)
    for e in rng.choice(box.n_edges, 6, replace=False):
        e = int(e)
        hi, lo = st_.bits.copy(), st_.bits.copy()
        hi[e], lo[e] = True, False
        w_hi = weight(hi, model) if not crossing_exists(EdgeConfiguration(box, hi)) else 0.0
        w_lo = weight(lo, model)
        assert st_.open_probability(e) == pytest.approx(w_hi / (w_hi + w_lo), rel=1e-12)


def test_chain_stays_in_I():
    box = Box(2, 2)
    st_ = ChainState(box, 0.7, 2.0, 5)
    for _ in range(20):
        st_.run(3)
        assert not crossing_exists(st_.omega)


def test_rejects_crossing_start():
    box = Box(1, 1)
    with pytest.raises(ValueError):
        ChainState(box, 0.5, 2.0, 0, EdgeConfiguration.all_open(box))
    with pytest.raises(ValueError):
        ChainState(box, 1.5, 2.0)


def test_uniform_blocks_reproducible():
    a = uniforms(3, 2, 16)
    assert a.shape == (BLOCK, 16)
    assert np.array_equal(a, uniforms(3, 2, 16))
    assert not np.array_equal(a, uniforms(3, 1, 16))
    assert not np.array_equal(a, uniforms(4, 2, 16))


def test_split_runs_equal_one_run():
    box = Box(1, 2)
    a = ChainState(box, 0.8, 2.0, 9)
    a.run(600)
    b = ChainState(box, 0.8, 2.0, 9)
    for k in (1, 254, 3, 342):
        b.run(k)
    assert a.sweep_count == b.sweep_count == 600
    assert np.array_equal(a.bits, b.bits)


def test_checkpoint_resume(tmp_path):
    box = Box(1, 1)
    a = ChainState(box, 0.75, 1.5, 21)
    a.run(300)
    path = tmp_path / "c.bin"
    a.save(path)
    b = ChainState.load(path)
    assert (b.p, b.q, b.seed, b.sweep_count) == (0.75, 1.5, 21, 300)
    assert np.array_equal(a.bits, b.bits)
    a.run(100)
    b.run(100)
    assert np.array_equal(a.bits, b.bits)
    path.write_bytes(b"XXXX" + path.read_bytes()[4:])
    with pytest.raises(ValueError):
        ChainState.load(path)


def test_record_codes():
    box = Box(0, 1)
    st_ = ChainState(box, 0.9, 2.0, 1)
    codes = st_.run(10, record=True)
    assert codes.shape == (10,)
    assert codes[-1] == sum(1 << i for i in range(box.n_edges) if st_.bits[i])
    with pytest.raises(ValueError):
        ChainState(Box(1, 1), 0.9, 2.0).run(1, record=True)


def test_sample_generator():
    cfg = SamplerConfig(1, 1, 0.9, 1.0, seed=4, burn_in=10, interval=3, n_samples=5)
    out = list(sample(cfg))
    assert [s for s, _ in out] == [13, 16, 19, 22, 25]
    assert all(not crossing_exists(o) for _, o in out)
    with pytest.raises(ValueError):
        list(sample(SamplerConfig(1, 1, 0.9, 1.0, init="bogus")))


def test_flat_start_closes_only_flat_verticals():
    box = Box(2, 1)
    om = flat_start(box)
    assert int((~om.bits).sum()) == 25
    assert all(not om[(x, y, 0, 2)] for x in range(-2, 3) for y in range(-2, 3))


def test_short_run_tv_decreases():
    from rcinterface.verify import tv_curve
    curve = tv_curve((2000, 20000))
    assert curve[1][1] < curve[0][1]
