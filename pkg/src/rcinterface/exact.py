"""Exact enumeration of random-cluster measures on small edge sets.

A :class:`FiniteModel` is a finite multigraph on integer nodes whose
boundary condition is summarised by ``wiring`` (groups of nodes joined
off the free edges) and optional ``labels`` (nodes whose clusters must not
meet a differently labelled node).  Everything is enumerated over the
``2**m`` states of the free edges; results are grouped by (open count,
cluster count) so that the measure at any other ``p`` is a polynomial
evaluation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numba import njit
from scipy import integrate

from .lattice import _find, _union, endpoints

ENUM_CAP = 24
DOMINANCE_CAP = 12


class CapExceeded(ValueError):
    pass


class EmptyConditioning(ValueError):
    pass


@njit(cache=True)
def _enumerate(n_nodes, eu, ev, base, lab):
    m = eu.shape[0]
    n_cfg = 1 << m
    ks = np.empty(n_cfg, dtype=np.int16)
    os_ = np.empty(n_cfg, dtype=np.int8)
    bad = np.zeros(n_cfg, dtype=np.bool_)
    parent = np.empty(n_nodes, dtype=np.int64)
    rootlab = np.empty(n_nodes, dtype=np.int64)
    for mask in range(n_cfg):
        for i in range(n_nodes):
            parent[i] = base[i]
        o = 0
        for j in range(m):
            if (mask >> j) & 1:
                o += 1
                _union(parent, eu[j], ev[j])
        k = 0
        for i in range(n_nodes):
            rootlab[i] = -1
        for i in range(n_nodes):
            r = _find(parent, i)
            if r == i:
                k += 1
            if lab[i] >= 0:
                if rootlab[r] < 0:
                    rootlab[r] = lab[i]
                elif rootlab[r] != lab[i]:
                    bad[mask] = True
        ks[mask] = k
        os_[mask] = o
    return ks, os_, bad


@njit(cache=True)
def _group_tables(m, ks, os_, keep, kmax):
    tot = np.zeros((m + 1, kmax + 1))
    per = np.zeros((m, m + 1, kmax + 1))
    for mask in range(ks.shape[0]):
        if not keep[mask]:
            continue
        o = os_[mask]
        k = ks[mask]
        tot[o, k] += 1.0
        for j in range(m):
            if (mask >> j) & 1:
                per[j, o, k] += 1.0
    return tot, per


@dataclass
class FiniteModel:
    """Free edges ``edges`` on nodes ``0..n_nodes-1`` with a fixed boundary.

    ``wiring`` lists node groups connected through the boundary
    configuration; ``labels`` maps nodes to labels for the conditioned
    measure.  ``names`` optionally records the lattice edge behind each
    free edge.
    """

    n_nodes: int
    edges: list
    wiring: list = field(default_factory=list)
    labels: dict = field(default_factory=dict)
    p: float = 0.5
    q: float = 1.0
    names: list | None = None

    def __post_init__(self):
        self.edges = [(int(u), int(v)) for u, v in self.edges]
        self.wiring = [sorted(int(x) for x in g) for g in self.wiring]
        self.labels = {int(k): v for k, v in self.labels.items()}
        for u, v in self.edges:
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise ValueError("edge endpoint out of range")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")
        if self.q <= 0:
            raise ValueError("q must be positive")
        parent = self.base_parent
        seen = {}
        for x, l in self.labels.items():
            r = parent[x]
            if seen.setdefault(r, l) != l:
                raise ValueError("boundary wiring joins nodes with different labels")

    @property
    def m(self) -> int:
        return len(self.edges)

    def with_params(self, p=None, q=None) -> "FiniteModel":
        return FiniteModel(self.n_nodes, self.edges, self.wiring, self.labels,
                           self.p if p is None else p, self.q if q is None else q,
                           self.names)

    def same_graph(self, other: "FiniteModel") -> bool:
        return (self.n_nodes == other.n_nodes and self.edges == other.edges
                and self.wiring == other.wiring and self.labels == other.labels)

    @cached_property
    def base_parent(self) -> np.ndarray:
        parent = np.arange(self.n_nodes)
        for g in self.wiring:
            for x in g[1:]:
                _union(parent, g[0], x)
        for i in range(self.n_nodes):
            parent[i] = _find(parent, i)
        return parent

    @cached_property
    def arrays(self):
        eu = np.array([u for u, _ in self.edges], dtype=np.int64)
        ev = np.array([v for _, v in self.edges], dtype=np.int64)
        names = sorted(set(self.labels.values()), key=str)
        lab = np.full(self.n_nodes, -1, dtype=np.int64)
        for x, l in self.labels.items():
            lab[x] = names.index(l)
        return eu, ev, lab

    def to_json(self) -> str:
        doc = {"format": "rc-model/1", "n_vertices": self.n_nodes,
               "edges": [list(e) for e in self.edges], "wiring": self.wiring,
               "labels": {str(k): v for k, v in self.labels.items()},
               "p": self.p, "q": self.q}
        if self.names is not None:
            doc["names"] = [list(e) for e in self.names]
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "FiniteModel":
        doc = json.loads(text)
        if doc.get("format") != "rc-model/1":
            raise ValueError("not an rc-model/1 document")
        names = doc.get("names")
        return cls(doc["n_vertices"], [tuple(e) for e in doc["edges"]], doc.get("wiring", []),
                   {int(k): v for k, v in doc.get("labels", {}).items()},
                   doc["p"], doc["q"], [tuple(e) for e in names] if names else None)


def cluster_count(omega, model: FiniteModel) -> int:
    """Open clusters of (omega on E, boundary off E) meeting the nodes."""
    parent = model.base_parent.copy()
    for j, (u, v) in enumerate(model.edges):
        if omega[j]:
            _union(parent, u, v)
    return len({_find(parent, i) for i in range(model.n_nodes)})


class Enumeration:
    """Per-configuration cluster counts for a model's graph (p, q free)."""

    def __init__(self, model: FiniteModel, cap: int = ENUM_CAP):
        if model.m > cap:
            raise CapExceeded(f"{model.m} edges exceed the enumeration cap {cap}")
        self.model = model
        eu, ev, lab = model.arrays
        self.k, self.o, self.bad = _enumerate(model.n_nodes, eu, ev, model.base_parent, lab)
        self.kmax = int(self.k.max()) if self.k.size else 0
        self._tables = {}

    def tables(self, conditioned: bool):
        if conditioned not in self._tables:
            keep = ~self.bad if conditioned else np.ones_like(self.bad)
            if not keep.any():
                raise EmptyConditioning("no configuration satisfies the label constraint")
            self._tables[conditioned] = _group_tables(self.model.m, self.k, self.o, keep, self.kmax)
        return self._tables[conditioned]

    def _qpow(self, q):
        return np.power(float(q), np.arange(self.kmax + 1, dtype=float))

    def Z(self, p, q, conditioned=False) -> float:
        tot, _ = self.tables(conditioned)
        m = self.model.m
        o = np.arange(m + 1)
        return float(np.sum((tot @ self._qpow(q)) * p ** o * (1 - p) ** (m - o)))

    def weights(self, p, q, conditioned=False) -> np.ndarray:
        m = self.model.m
        o = self.o.astype(np.int64)
        w = p ** o * (1 - p) ** (m - o) * self._qpow(q)[self.k]
        if conditioned:
            w = np.where(self.bad, 0.0, w)
        return w

    def marginals(self, p, q, conditioned=False) -> np.ndarray:
        tot, per = self.tables(conditioned)
        m = self.model.m
        o = np.arange(m + 1)
        poly = p ** o * (1 - p) ** (m - o)
        qp = self._qpow(q)
        return (per @ qp) @ poly / ((tot @ qp) @ poly)

    def g_integrand(self, j, r, q) -> float:
        """(r - P_r(e open)) / (r (1 - r)) without the removable singularities."""
        tot, per = self.tables(False)
        m = self.model.m
        qp = self._qpow(q)
        w_all = tot @ qp
        w_open = per[j] @ qp
        w_closed = w_all - w_open
        o = np.arange(m + 1)
        Z = np.sum(w_all * r ** o * (1 - r) ** (m - o))
        oc = o[:m]
        closed = np.sum(w_closed[:m] * r ** oc * (1 - r) ** (m - oc - 1))
        oo = o[1:]
        opened = np.sum(w_open[1:] * r ** (oo - 1) * (1 - r) ** (m - oo))
        return float((closed - opened) / Z)


@dataclass
class MeasureTable:
    """Probability of every configuration, indexed by bitmask over the edges."""

    model: FiniteModel
    conditioned: bool
    weights: np.ndarray
    Z: float

    @property
    def probs(self) -> np.ndarray:
        return self.weights / self.Z

    def expect(self, f: np.ndarray) -> float:
        return float(np.dot(self.probs, f))


def _enum(model, cap=ENUM_CAP) -> Enumeration:
    return Enumeration(model, cap)


def partition_function(model: FiniteModel, conditioned=False, cap=ENUM_CAP) -> float:
    return _enum(model, cap).Z(model.p, model.q, conditioned)


def measure(model: FiniteModel, conditioned=False, cap=ENUM_CAP, enum=None) -> MeasureTable:
    en = enum or _enum(model, cap)
    if conditioned:
        en.tables(True)
    w = en.weights(model.p, model.q, conditioned)
    return MeasureTable(model, conditioned, w, float(w.sum()))


def g_function(model: FiniteModel, j: int, enum=None, cap=ENUM_CAP) -> float:
    """g(e) for free edge ``j``: the integral over [p, 1] of the density gap.

    Integrated with QUADPACK's adaptive Gauss-Kronrod rule.
    """
    if model.q == 1:
        return 0.0
    en = enum or _enum(model, cap)
    if model.p >= 1:
        return 0.0
    val, _ = integrate.quad(lambda r: en.g_integrand(j, r, model.q), model.p, 1.0,
                            epsabs=1e-14, epsrel=1e-13, limit=500)
    return float(val)


def g_all(model: FiniteModel, enum=None, cap=ENUM_CAP) -> np.ndarray:
    en = enum or _enum(model, cap)
    return np.array([g_function(model, j, en) for j in range(model.m)])


def g_bounds_hold(g, p, q, slack=1e-12) -> bool:
    """0 <= g <= (1-p)(q-1) for q >= 1, with the inequalities reversed for q < 1."""
    hi = (1 - p) * (q - 1)
    g = np.asarray(g)
    if q >= 1:
        return bool(np.all(g >= -slack) and np.all(g <= hi + slack))
    return bool(np.all(g <= slack) and np.all(g >= hi - slack))


def g_interval(p, q) -> tuple[float, float]:
    """Range of g valid for every q > 0.

    The integrand lies between 0 and (q-1)/(r+(1-r)q); integrating the
    latter gives log(p+(1-p)q), attained by an edge whose endpoints are
    never joined off it.  For q >= 1 the upper end is at most (1-p)(q-1).
    """
    b = float(np.log(p + (1 - p) * q))
    return (0.0, b) if q >= 1 else (b, 0.0)


def g_interval_holds(g, p, q, slack=1e-12) -> bool:
    lo, hi = g_interval(p, q)
    g = np.asarray(g)
    return bool(np.all(g >= lo - slack) and np.all(g <= hi + slack))


def verify_log_partition(model: FiniteModel, cap=ENUM_CAP) -> float:
    """Residual of log Z = k(all open) log q + sum of g over the edges."""
    en = _enum(model, cap)
    if model.q == 1:
        return 0.0  # Bernoulli weights sum to exactly one and every g vanishes
    logZ = np.log(en.Z(model.p, model.q))
    k1 = int(en.k[(1 << model.m) - 1])
    return float(abs(logZ - k1 * np.log(model.q) - g_all(model, en).sum()))


# ---------------------------------------------------------------- dominance

def coupling_deficit(phi1: np.ndarray, phi2: np.ndarray, m: int) -> float:
    """Mass of phi1 that cannot be moved upward onto phi2.

    Max flow from phi1 to phi2 on the Boolean lattice where mass may only
    travel along covering relations x -> x + e_i.  Zero deficit means a
    monotone coupling exists; the deficit equals max over up-sets U of
    phi1(U) - phi2(U).
    """
    import networkx as nx

    n = 1 << m
    G = nx.DiGraph()
    for x in range(n):
        if phi1[x] > 0:
            G.add_edge("s", ("a", x), capacity=float(phi1[x]))
            G.add_edge(("a", x), ("b", x))
        if phi2[x] > 0:
            G.add_edge(("b", x), "t", capacity=float(phi2[x]))
        for i in range(m):
            if not (x >> i) & 1:
                G.add_edge(("b", x), ("b", x | (1 << i)))
    if "s" not in G or "t" not in G:
        return float(phi1.sum())
    value = nx.maximum_flow_value(G, "s", "t")
    return float(phi1.sum() - value)


def check_dominance(model1: FiniteModel, model2: FiniteModel, conditioned=False,
                    tol=1e-9, cap=DOMINANCE_CAP) -> bool:
    """True iff the measure of model1 is stochastically below that of model2."""
    if not model1.same_graph(model2):
        raise ValueError("models must share edges and boundary condition")
    if model1.m > cap:
        raise CapExceeded(f"{model1.m} edges exceed the dominance cap {cap}")
    en = _enum(model1, cap)
    phi1 = measure(model1, conditioned, enum=en).probs
    phi2 = measure(model2, conditioned, enum=en).probs
    return coupling_deficit(phi1, phi2, model1.m) <= tol


def random_increasing_functions(m, n_funcs, rng, n_terms=4):
    """Values on {0,1}^m of sums c_j 1{omega >= a_j} with c_j > 0."""
    masks = np.arange(1 << m)
    out = np.zeros((n_funcs, 1 << m))
    for i in range(n_funcs):
        for _ in range(n_terms):
            a = int(rng.integers(0, 1 << m))
            out[i] += rng.random() * ((masks & a) == a)
    return out


# ------------------------------------------------------------ lattice models

def lattice_model(edges, p, q, boundary="wired") -> FiniteModel:
    """Model on lattice edges with free or wired ('1') boundary.

    Under the wired boundary every edge outside ``edges`` is open, so nodes
    joined by such edges are wired together; the unbounded part of the
    complement is a single group.
    """
    edges = [tuple(e) for e in edges]
    E = set(edges)
    verts = sorted({x for e in edges for x in endpoints(e)})
    vid = {x: i for i, x in enumerate(verts)}
    wiring = []
    if boundary == "wired":
        from .plaquettes import _flood, default_window, window_border
        lo, hi = default_window([], verts)
        window = (tuple(v - 1 for v in lo), tuple(v + 1 for v in hi))
        outer = _flood(window, E, window_border(window))
        rest = set(verts) - outer
        inf = [vid[x] for x in verts if x in outer]
        if len(inf) > 1:
            wiring.append(inf)
        while rest:
            x = min(rest)
            comp = _flood(window, E, [x])
            rest -= comp
            g = [vid[y] for y in comp if y in vid]
            if len(g) > 1:
                wiring.append(g)
    elif boundary != "free":
        raise ValueError("boundary must be 'wired' or 'free'")
    return FiniteModel(len(verts), [(vid[a], vid[b]) for a, b in map(endpoints, edges)],
                       wiring, {}, p, q, edges)


def dobrushin_model(box, p, q) -> FiniteModel:
    """The box edges with the Dobrushin boundary, exterior contracted."""
    u, v = box.ends
    return FiniteModel(box.n_nodes, list(zip(u.tolist(), v.tolist())), [],
                       {box.TOP: "+", box.BOTTOM: "-"}, p, q, list(box.edges))


def g_locality_table(e, E2, ns, p, q):
    """Rows (n, |g(e, E2 cap Q_n(e)) - g(e, E2)|) under wired boundaries."""
    e = tuple(e)
    E2 = [tuple(f) for f in E2]
    big = lattice_model(E2, p, q)
    g2 = g_function(big, E2.index(e))
    a, b = endpoints(e)
    rows = []
    for n in ns:
        def near(x):
            return any(all(abs(x[i] - c[i]) <= n for i in range(3)) for c in (a, b))
        E1 = [f for f in E2 if all(near(x) for x in endpoints(f))]
        small = lattice_model(E1, p, q)
        rows.append((n, abs(g_function(small, E1.index(e)) - g2)))
    return rows


# ------------------------------------------------------- interface identities

def interface_probability_check(box, delta, p, q, cap=ENUM_CAP):
    """Both sides of the interface-probability formula on a toy box.

    ``lhs`` sums the Dobrushin weight over all configurations whose
    interface is ``delta``; ``rhs`` is the wired partition function of
    W(delta) times the closed form for the forced edges.
    """
    from .interface import K_delta, box_parts, extract_interface, NotInI
    from .lattice import EdgeConfiguration

    D, R, Wd = box_parts(box, delta)
    if len(Wd) > cap:
        raise CapExceeded(f"|W(delta)| = {len(Wd)} exceeds the cap {cap}")
    dob = dobrushin_model(box, p, q)
    idx = box.edge_index
    wi = np.array([idx[e] for e in Wd], dtype=np.int64)
    bits = np.zeros(box.n_edges, dtype=np.bool_)
    for e in R:
        bits[idx[e]] = True
    lhs = 0.0
    for mask in range(1 << len(Wd)):
        b = bits.copy()
        b[wi] = [(mask >> j) & 1 for j in range(len(Wd))]
        omega = EdgeConfiguration(box, b)
        try:
            if extract_interface(omega) != delta:
                continue
        except NotInI:
            continue
        o = int(b.sum())
        lhs += p ** o * (1 - p) ** (box.n_edges - o) * q ** cluster_count(b, dob)
    Z1 = partition_function(lattice_model(Wd, p, q)) if Wd else 1.0
    rhs = Z1 * p ** len(R) * (1 - p) ** len(D) * q ** (K_delta(box, delta) - 1)
    return lhs, rhs


def nu(f, delta_edges):
    """Nearest edge of ``delta_edges`` to f (L-infinity on centres), earliest centre on ties."""
    from .lattice import edge_centre2

    cf = edge_centre2(f)

    def key(e):
        c = edge_centre2(e)
        return (max(abs(c[i] - cf[i]) for i in range(3)), c)

    return min(delta_edges, key=key)


def f_table(box, delta, p, q):
    """f_p(e, delta) for every e in E(delta) within the box, as a dict."""
    from .interface import box_parts

    D, R, Wd = box_parts(box, delta)
    full = lattice_model(box.edges, p, q)
    g_full = dict(zip(box.edges, g_all(full)))
    g_W = dict(zip(Wd, g_all(lattice_model(Wd, p, q)))) if Wd else {}
    out = {e: 0.0 for e in D}
    for f in Wd:
        out[nu(f, D)] += g_W[f] - g_full[f]
    for f in D + R:
        out[nu(f, D)] -= g_full[f]
    return out


def compute_f(e, box, delta, p, q) -> float:
    return f_table(box, delta, p, q)[tuple(e)]


def f_sum_residual(box, delta, p, q) -> float:
    """|sum of f_p - log(Z1(W(delta)) / Z1(E_{L,M}))|."""
    from .interface import box_parts

    _, _, Wd = box_parts(box, delta)
    zW = partition_function(lattice_model(Wd, p, q)) if Wd else 1.0
    zE = partition_function(lattice_model(box.edges, p, q))
    return abs(sum(f_table(box, delta, p, q).values()) - np.log(zW / zE))
