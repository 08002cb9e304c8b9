"""Heat-bath dynamics for the Dobrushin random-cluster measure conditioned on no crossing.

Each step resamples one edge from its exact conditional law: with
``kappa = 0`` when the endpoints are already joined off the edge,
open with probability ``p / (p + (1 - p) q**kappa)``, except that an
opening which would join TOP to BOTTOM is refused.  Connectivity off the
edge is decided by a bidirectional breadth-first search from both
endpoints; the two exterior supernodes are never expanded, only touched.

Uniforms come from Philox keyed by the seed.  The uniform for edge ``e``
at sweep ``t`` is entry ``(t % 256) * n_edges + e`` of block ``t // 256``,
so runs are reproducible and resumable at any sweep.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .lattice import Box, EdgeConfiguration, crossing_exists

BLOCK = 256

CONNECTED = 0
SEPARATE = 1
FORBIDDEN = 2


@njit(cache=True)
def _probe(a, b, e, bits, ptr, adj_e, adj_n, nv, top, bot, markA, markB, stamp, qa, qb):
    """Relation between a and b with edge e removed: CONNECTED, SEPARATE or FORBIDDEN."""
    # supernodes touched by each side: bit 0 = TOP, bit 1 = BOTTOM
    sa = 0
    sb = 0
    ha = 0
    ta = 0
    hb = 0
    tb = 0
    if a >= nv:
        sa = 1 if a == top else 2
    else:
        markA[a] = stamp
        qa[ta] = a
        ta += 1
    if b >= nv:
        sb = 1 if b == top else 2
    else:
        if a < nv and markA[b] == stamp:
            return CONNECTED
        markB[b] = stamp
        qb[tb] = b
        tb += 1
    while True:
        if sa & sb:
            return CONNECTED
        if (sa | sb) == 3 and sa != 0 and sb != 0:
            return FORBIDDEN
        doneA = ha >= ta
        doneB = hb >= tb
        if doneA and sa == 0:
            return SEPARATE
        if doneB and sb == 0:
            return SEPARATE
        if doneA and doneB:
            return SEPARATE
        if not doneA:
            x = qa[ha]
            ha += 1
            for k in range(ptr[x], ptr[x + 1]):
                f = adj_e[k]
                if f == e or not bits[f]:
                    continue
                y = adj_n[k]
                if y >= nv:
                    sa |= 1 if y == top else 2
                    continue
                if markB[y] == stamp:
                    return CONNECTED
                if markA[y] != stamp:
                    markA[y] = stamp
                    qa[ta] = y
                    ta += 1
        if not doneB:
            x = qb[hb]
            hb += 1
            for k in range(ptr[x], ptr[x + 1]):
                f = adj_e[k]
                if f == e or not bits[f]:
                    continue
                y = adj_n[k]
                if y >= nv:
                    sb |= 1 if y == top else 2
                    continue
                if markA[y] == stamp:
                    return CONNECTED
                if markB[y] != stamp:
                    markB[y] = stamp
                    qb[tb] = y
                    tb += 1


@njit(cache=True)
def _open_prob(rel, p, q):
    if rel == FORBIDDEN:
        return 0.0
    if rel == CONNECTED:
        return p
    return p / (p + (1.0 - p) * q)


@njit(cache=True)
def _sweeps(bits, eu, ev, ptr, adj_e, adj_n, nv, top, bot, p, q, unif, n, markA, markB,
            stamp0, qa, qb, codes):
    """Run ``n`` sweeps using rows of ``unif``; optionally record the state code per sweep."""
    m = bits.shape[0]
    stamp = stamp0
    for t in range(n):
        for e in range(m):
            stamp += 1
            rel = _probe(eu[e], ev[e], e, bits, ptr, adj_e, adj_n, nv, top, bot,
                         markA, markB, stamp, qa, qb)
            bits[e] = unif[t, e] < _open_prob(rel, p, q)
        if codes.shape[0] > 0:
            c = 0
            for e in range(m):
                if bits[e]:
                    c |= 1 << e
            codes[t] = c
    return stamp


def uniforms(seed: int, block: int, n_edges: int) -> np.ndarray:
    """Uniform table for sweeps ``block*256 .. block*256+255`` (rows) and edges (columns)."""
    bg = np.random.Philox(key=int(seed), counter=[0, 0, int(block), 0])
    return np.random.Generator(bg).random((BLOCK, n_edges))


@dataclass
class SamplerConfig:
    L: int
    M: int
    p: float
    q: float
    seed: int = 0
    burn_in: int = 1000
    interval: int = 10
    n_samples: int = 100
    init: str = "flat"


class ChainState:
    """A configuration in I together with the sweep counter and RNG key."""

    def __init__(self, box: Box, p: float, q: float, seed: int = 0, omega=None, sweep: int = 0):
        if not 0.0 <= p <= 1.0 or q <= 0:
            raise ValueError("need p in [0, 1] and q > 0")
        self.box, self.p, self.q, self.seed, self.sweep_count = box, float(p), float(q), int(seed), int(sweep)
        if omega is None:
            omega = flat_start(box)
        if crossing_exists(omega):
            raise ValueError("initial configuration has a crossing")
        self.omega = omega
        n = box.n_vertices
        self._markA = np.zeros(n, dtype=np.int64)
        self._markB = np.zeros(n, dtype=np.int64)
        self._qa = np.empty(n, dtype=np.int64)
        self._qb = np.empty(n, dtype=np.int64)
        self._stamp = 0
        self._block = (None, None)

    @property
    def bits(self) -> np.ndarray:
        return self.omega.bits

    def _graph(self):
        u, v = self.box.ends
        ptr, adj_e, adj_n = self.box.adjacency
        return u, v, ptr, adj_e, adj_n

    def relation(self, e: int) -> int:
        u, v, ptr, adj_e, adj_n = self._graph()
        self._stamp += 1
        return int(_probe(u[e], v[e], e, self.bits, ptr, adj_e, adj_n, self.box.n_vertices,
                          self.box.TOP, self.box.BOTTOM, self._markA, self._markB, self._stamp,
                          self._qa, self._qb))

    def connected_off_edge(self, e: int) -> bool:
        """Endpoints of e joined without e (TOP-BOTTOM pairs never are, inside I)."""
        return self.relation(e) == CONNECTED

    def open_probability(self, e: int) -> float:
        return float(_open_prob(self.relation(e), self.p, self.q))

    def heat_bath_step(self, e: int, u: float) -> None:
        self.bits[e] = u < self.open_probability(e)

    def _uniforms(self, block):
        if self._block[0] != block:
            self._block = (block, uniforms(self.seed, block, self.box.n_edges))
        return self._block[1]

    def run(self, n_sweeps: int, record: bool = False) -> np.ndarray | None:
        """Advance ``n_sweeps`` sweeps; with ``record`` return the state code after each."""
        if record and self.box.n_edges > 62:
            raise ValueError("state codes need at most 62 edges")
        u, v, ptr, adj_e, adj_n = self._graph()
        codes = np.zeros(n_sweeps if record else 0, dtype=np.int64)
        done = 0
        while done < n_sweeps:
            t = self.sweep_count
            block, off = divmod(t, BLOCK)
            k = min(BLOCK - off, n_sweeps - done)
            unif = self._uniforms(block)[off:off + k]
            out = codes[done:done + k] if record else codes
            self._stamp = _sweeps(self.bits, u, v, ptr, adj_e, adj_n, self.box.n_vertices,
                                  self.box.TOP, self.box.BOTTOM, self.p, self.q, unif, k,
                                  self._markA, self._markB, self._stamp, self._qa, self._qb, out)
            done += k
            self.sweep_count += k
        return codes if record else None

    def sweep(self) -> None:
        self.run(1)

    # --------------------------------------------------------- checkpoint

    _HEAD = struct.Struct("<4sIIIddQQQ")
    MAGIC = b"RCMC"

    def save(self, path) -> None:
        head = self._HEAD.pack(self.MAGIC, 1, self.box.L, self.box.M, self.p, self.q,
                               self.seed, self.sweep_count, self.box.n_edges)
        with open(path, "wb") as fh:
            fh.write(head)
            fh.write(np.packbits(self.bits, bitorder="little").tobytes())

    @classmethod
    def load(cls, path) -> "ChainState":
        with open(path, "rb") as fh:
            raw = fh.read()
        magic, ver, L, M, p, q, seed, sweep, nbits = cls._HEAD.unpack_from(raw)
        if magic != cls.MAGIC or ver != 1:
            raise ValueError("not a chain checkpoint")
        box = Box(L, M)
        if nbits != box.n_edges:
            raise ValueError("checkpoint edge count does not match the box")
        bits = np.unpackbits(np.frombuffer(raw[cls._HEAD.size:], dtype=np.uint8),
                             bitorder="little")[:nbits].astype(np.bool_)
        return cls(box, p, q, seed, EdgeConfiguration(box, bits), sweep)


def flat_start(box: Box) -> EdgeConfiguration:
    """All box edges open except the verticals from height 0 to 1."""
    return EdgeConfiguration.maximal(box, box.regular_edges())


def sample(cfg: SamplerConfig):
    """Yield (sweep, configuration copy) after burn-in, every ``interval`` sweeps."""
    box = Box(cfg.L, cfg.M)
    if cfg.init == "flat":
        start = flat_start(box)
    elif cfg.init == "closed":
        start = EdgeConfiguration.all_closed(box)
    else:
        raise ValueError(f"unknown init {cfg.init!r}")
    st = ChainState(box, cfg.p, cfg.q, cfg.seed, start)
    st.run(cfg.burn_in)
    for _ in range(cfg.n_samples):
        st.run(cfg.interval)
        yield st.sweep_count, st.omega.copy()
