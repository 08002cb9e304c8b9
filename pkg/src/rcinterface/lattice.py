"""Integer lattice, boxes and the Dobrushin boundary condition.

Edges are stored as tuples ``(x1, x2, x3, axis)`` where ``(x1, x2, x3)`` is the
lexicographically smaller endpoint and ``axis`` in {0, 1, 2} is the direction
towards the other endpoint.  Outside a box every edge takes its Dobrushin
value, so connectivity of the exterior is summarised by two supernodes:
``TOP`` (all outside vertices with x3 >= 1) and ``BOTTOM`` (x3 <= 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numba import njit

Vertex = tuple[int, int, int]
Edge = tuple[int, int, int, int]

UNIT = ((1, 0, 0), (0, 1, 0), (0, 0, 1))


def make_edge(x: Vertex, y: Vertex) -> Edge:
    """Canonical edge between two vertices at L1 distance one."""
    d = [b - a for a, b in zip(x, y)]
    if sum(abs(v) for v in d) != 1:
        raise ValueError(f"{x} and {y} are not neighbours")
    axis = next(i for i in range(3) if d[i] != 0)
    lo = x if d[axis] > 0 else y
    return (lo[0], lo[1], lo[2], axis)


def endpoints(e: Edge) -> tuple[Vertex, Vertex]:
    x1, x2, x3, a = e
    u = UNIT[a]
    return (x1, x2, x3), (x1 + u[0], x2 + u[1], x3 + u[2])


def edge_centre2(e: Edge) -> tuple[int, int, int]:
    """Centre of ``e`` in doubled (integral) coordinates."""
    x1, x2, x3, a = e
    c = [2 * x1, 2 * x2, 2 * x3]
    c[a] += 1
    return (c[0], c[1], c[2])


def mu(e: Edge) -> int:
    """Dobrushin boundary value: 0 only on verticals from height 0 to 1."""
    return 0 if (e[3] == 2 and e[2] == 0) else 1


@njit(cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True)
def _union(parent, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra != rb:
        if ra < rb:
            parent[rb] = ra
        else:
            parent[ra] = rb


@njit(cache=True)
def component_labels(n_nodes, eu, ev, open_mask):
    parent = np.arange(n_nodes)
    for i in range(eu.shape[0]):
        if open_mask[i]:
            _union(parent, eu[i], ev[i])
    for i in range(n_nodes):
        parent[i] = _find(parent, i)
    return parent


@dataclass(frozen=True)
class Box:
    """The box [-L, L]^2 x [-M, M] together with its edge set E_{L,M}.

    Box vertices get dense ids; the two exterior supernodes follow them.
    Edge ids are ordered by (axis, x3, x2, x1) of the lower endpoint.
    """

    L: int
    M: int

    def __post_init__(self):
        if self.L < 0 or self.M < 1:
            raise ValueError(f"need L >= 0 and M >= 1, got L={self.L}, M={self.M}")

    @property
    def side(self) -> int:
        return 2 * self.L + 1

    @property
    def height(self) -> int:
        return 2 * self.M + 1

    @property
    def n_vertices(self) -> int:
        return self.side * self.side * self.height

    @property
    def TOP(self) -> int:
        return self.n_vertices

    @property
    def BOTTOM(self) -> int:
        return self.n_vertices + 1

    @property
    def n_nodes(self) -> int:
        return self.n_vertices + 2

    def contains(self, x: Vertex) -> bool:
        return abs(x[0]) <= self.L and abs(x[1]) <= self.L and abs(x[2]) <= self.M

    def vertex_id(self, x: Vertex) -> int:
        """Node id of ``x``; exterior vertices map to TOP or BOTTOM."""
        if not self.contains(x):
            return self.TOP if x[2] > 0 else self.BOTTOM
        s = self.side
        return ((x[2] + self.M) * s + (x[1] + self.L)) * s + (x[0] + self.L)

    def vertex(self, vid: int) -> Vertex:
        s = self.side
        i = vid % s
        j = (vid // s) % s
        k = vid // (s * s)
        return (i - self.L, j - self.L, k - self.M)

    def vertices(self):
        return [self.vertex(i) for i in range(self.n_vertices)]

    @cached_property
    def edges(self) -> list[Edge]:
        L, M = self.L, self.M
        out = []
        for axis in range(3):
            lo = [-L, -L, -M]
            hi = [L, L, M]
            lo[axis] -= 1
            for x3 in range(lo[2], hi[2] + 1):
                for x2 in range(lo[1], hi[1] + 1):
                    for x1 in range(lo[0], hi[0] + 1):
                        out.append((x1, x2, x3, axis))
        return out

    @cached_property
    def edge_index(self) -> dict[Edge, int]:
        return {e: i for i, e in enumerate(self.edges)}

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def in_box(self, e: Edge) -> bool:
        a, b = endpoints(e)
        return self.contains(a) or self.contains(b)

    @cached_property
    def ends(self) -> tuple[np.ndarray, np.ndarray]:
        """Node ids (u, v) of every edge; exterior endpoints contracted."""
        u = np.empty(self.n_edges, dtype=np.int64)
        v = np.empty(self.n_edges, dtype=np.int64)
        for i, e in enumerate(self.edges):
            a, b = endpoints(e)
            u[i] = self.vertex_id(a)
            v[i] = self.vertex_id(b)
        return u, v

    @cached_property
    def adjacency(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """CSR adjacency of box vertices: (ptr, edge ids, neighbour node ids)."""
        u, v = self.ends
        nv = self.n_vertices
        deg = np.zeros(nv + 1, dtype=np.int64)
        for i in range(self.n_edges):
            if u[i] < nv:
                deg[u[i] + 1] += 1
            if v[i] < nv:
                deg[v[i] + 1] += 1
        ptr = np.cumsum(deg)
        fill = ptr[:-1].copy()
        adj_e = np.empty(ptr[-1], dtype=np.int64)
        adj_n = np.empty(ptr[-1], dtype=np.int64)
        for i in range(self.n_edges):
            for a, b in ((u[i], v[i]), (v[i], u[i])):
                if a < nv:
                    adj_e[fill[a]] = i
                    adj_n[fill[a]] = b
                    fill[a] += 1
        return ptr, adj_e, adj_n

    def boundary_partition(self) -> tuple[set[Vertex], set[Vertex]]:
        """Upper and lower boundaries: outside neighbours split by x3 > 0."""
        upper, lower = set(), set()
        for e in self.edges:
            for x in endpoints(e):
                if not self.contains(x):
                    (upper if x[2] > 0 else lower).add(x)
        return upper, lower

    def regular_edges(self) -> list[int]:
        """Ids of the box verticals from height 0 to 1 (dual to the flat plane)."""
        return [self.edge_index[(x1, x2, 0, 2)]
                for x2 in range(-self.L, self.L + 1)
                for x1 in range(-self.L, self.L + 1)]


def build_box(L: int, M: int) -> Box:
    return Box(L, M)


class EdgeConfiguration:
    """Open/closed state of E_{L,M}; everything outside equals mu."""

    def __init__(self, box: Box, bits=None):
        self.box = box
        if bits is None:
            bits = np.zeros(box.n_edges, dtype=np.bool_)
        bits = np.asarray(bits, dtype=np.bool_)
        if bits.shape != (box.n_edges,):
            raise ValueError("bit array does not match the edge set")
        self.bits = bits

    @classmethod
    def all_open(cls, box: Box) -> "EdgeConfiguration":
        return cls(box, np.ones(box.n_edges, dtype=np.bool_))

    @classmethod
    def all_closed(cls, box: Box) -> "EdgeConfiguration":
        return cls(box)

    @classmethod
    def maximal(cls, box: Box, closed_edges) -> "EdgeConfiguration":
        """All edges open except the given ones (edge tuples or ids)."""
        bits = np.ones(box.n_edges, dtype=np.bool_)
        for e in closed_edges:
            idx = e if isinstance(e, (int, np.integer)) else box.edge_index[e]
            bits[idx] = False
        return cls(box, bits)

    def __getitem__(self, e: Edge) -> int:
        idx = self.box.edge_index.get(e)
        if idx is None:
            return mu(e)
        return int(self.bits[idx])

    def copy(self) -> "EdgeConfiguration":
        return EdgeConfiguration(self.box, self.bits.copy())

    def __le__(self, other: "EdgeConfiguration") -> bool:
        return bool(np.all(~self.bits | other.bits))

    def __eq__(self, other) -> bool:
        return (isinstance(other, EdgeConfiguration) and self.box == other.box
                and bool(np.array_equal(self.bits, other.bits)))

    def labels(self) -> np.ndarray:
        u, v = self.box.ends
        return component_labels(self.box.n_nodes, u, v, self.bits)

    def cluster_count(self) -> int:
        """Open clusters meeting V(E_{L,M}), the two exterior ones included."""
        return len(np.unique(self.labels()))


def crossing_exists(omega: EdgeConfiguration) -> bool:
    """True iff an open path joins the upper and lower boundary."""
    lab = omega.labels()
    return bool(lab[omega.box.TOP] == lab[omega.box.BOTTOM])
