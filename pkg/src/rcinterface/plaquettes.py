"""Dual plaquettes, their adjacency, projections and enclosure.

A plaquette is identified with its dual edge, so both share the tuple layout
``(x1, x2, x3, axis)``.  The plaquette dual to an axis-``a`` edge is the unit
square perpendicular to ``a`` through the edge midpoint.  All geometry is done
in doubled coordinates so corners and centres stay integral.
"""

from __future__ import annotations

import enum
from collections import deque
from typing import Iterable, NamedTuple

from .lattice import UNIT, Edge, Vertex, edge_centre2, endpoints

Plaquette = Edge
Cell = tuple[int, int]

_DIRS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))


class Adjacency(enum.IntEnum):
    NONE = -1
    ZERO = 0
    ONE = 1


def dual(e: Edge) -> Plaquette:
    return tuple(e)


def edge_of(h: Plaquette) -> Edge:
    return tuple(h)


def is_horizontal(h: Plaquette) -> bool:
    return h[3] == 2


def centre2(h: Plaquette) -> tuple[int, int, int]:
    return edge_centre2(h)


def corners2(h: Plaquette) -> frozenset[tuple[int, int, int]]:
    c = centre2(h)
    b, d = [i for i in range(3) if i != h[3]]
    out = []
    for s in (-1, 1):
        for t in (-1, 1):
            p = list(c)
            p[b] += s
            p[d] += t
            out.append(tuple(p))
    return frozenset(out)


def adjacency(h1: Plaquette, h2: Plaquette) -> Adjacency:
    """Intersection type of two distinct closed plaquettes.

    Squares of the dual complex meet in a common face, so the number of
    shared corners decides: two is a unit segment, one is a point.
    """
    shared = len(corners2(h1) & corners2(h2))
    if shared >= 2:
        return Adjacency.ONE
    if shared == 1:
        return Adjacency.ZERO
    return Adjacency.NONE


def _offset_tables():
    one = {0: [], 1: [], 2: []}
    zero = {0: [], 1: [], 2: []}
    for a in range(3):
        h = (0, 0, 0, a)
        for b in range(3):
            for dx in range(-2, 3):
                for dy in range(-2, 3):
                    for dz in range(-2, 3):
                        g = (dx, dy, dz, b)
                        if g == h:
                            continue
                        kind = adjacency(h, g)
                        if kind >= Adjacency.ZERO:
                            zero[a].append(g)
                        if kind == Adjacency.ONE:
                            one[a].append(g)
    return ({a: tuple(v) for a, v in one.items()},
            {a: tuple(v) for a, v in zero.items()})


ONE_OFFSETS, ZERO_OFFSETS = _offset_tables()


def neighbours1(h: Plaquette):
    x, y, z, _ = h
    return [(x + dx, y + dy, z + dz, b) for dx, dy, dz, b in ONE_OFFSETS[h[3]]]


def neighbours0(h: Plaquette):
    """All plaquettes meeting ``h`` (1-connected ones included)."""
    x, y, z, _ = h
    return [(x + dx, y + dy, z + dz, b) for dx, dy, dz, b in ZERO_OFFSETS[h[3]]]


class Projection(NamedTuple):
    """Image of a plaquette on the regular interface.

    ``cell`` is set for horizontal plaquettes, ``segment`` (two endpoints at
    height 1/2) for vertical ones.
    """

    cell: Cell | None
    segment: tuple[tuple[float, float, float], tuple[float, float, float]] | None


def project(h: Plaquette) -> Projection:
    x1, x2, _, a = h
    if a == 2:
        return Projection((x1, x2), None)
    if a == 0:
        return Projection(None, ((x1 + 0.5, x2 - 0.5, 0.5), (x1 + 0.5, x2 + 0.5, 0.5)))
    return Projection(None, ((x1 - 0.5, x2 + 0.5, 0.5), (x1 + 0.5, x2 + 0.5, 0.5)))


def cell_of(h: Plaquette) -> Cell:
    return (h[0], h[1])


def projection_cells(h: Plaquette) -> tuple[Cell, ...]:
    """Cells whose closed square contains the projection of ``h``."""
    x1, x2, _, a = h
    if a == 2:
        return ((x1, x2),)
    if a == 0:
        return ((x1, x2), (x1 + 1, x2))
    return ((x1, x2), (x1, x2 + 1))


def projects_into(h: Plaquette, cells) -> bool:
    """Whether the projection of ``h`` lies in the closed union of ``cells``."""
    return any(c in cells for c in projection_cells(h))


def extend(H: Iterable[Plaquette]) -> set[Plaquette]:
    """H together with every plaquette 1-connected to a member of H."""
    H = set(H)
    out = set(H)
    for h in H:
        out.update(neighbours1(h))
    return out


def _components(H, neighbours) -> list[set[Plaquette]]:
    H = set(H)
    seen = set()
    comps = []
    for h in sorted(H):
        if h in seen:
            continue
        comp = {h}
        seen.add(h)
        todo = [h]
        while todo:
            g = todo.pop()
            for f in neighbours(g):
                if f in H and f not in seen:
                    seen.add(f)
                    comp.add(f)
                    todo.append(f)
        comps.append(comp)
    return comps


def one_components(H) -> list[set[Plaquette]]:
    return _components(H, neighbours1)


def zero_components(H) -> list[set[Plaquette]]:
    return _components(H, neighbours0)


def is_one_connected(H) -> bool:
    return len(one_components(H)) <= 1


def _bbox(points):
    pts = list(points)
    lo = tuple(min(p[i] for p in pts) for i in range(3))
    hi = tuple(max(p[i] for p in pts) for i in range(3))
    return lo, hi


def default_window(H, extra_vertices=()) -> tuple[Vertex, Vertex]:
    """Smallest vertex box leaving one cell of margin around [H]."""
    pts = [x for h in H for x in endpoints(h)] + list(extra_vertices)
    if not pts:
        return (-1, -1, -1), (1, 1, 1)
    lo, hi = _bbox(pts)
    return tuple(v - 1 for v in lo), tuple(v + 1 for v in hi)


def _flood(window, blocked, start, avoid=frozenset()):
    lo, hi = window
    seen = set(start)
    todo = deque(start)
    while todo:
        x = todo.popleft()
        for i, d in enumerate(_DIRS):
            y = (x[0] + d[0], x[1] + d[1], x[2] + d[2])
            if y in seen or y in avoid:
                continue
            if not (lo[0] <= y[0] <= hi[0] and lo[1] <= y[1] <= hi[1] and lo[2] <= y[2] <= hi[2]):
                continue
            a = i // 2
            e = (x[0], x[1], x[2], a) if d[a] > 0 else (y[0], y[1], y[2], a)
            if e in blocked:
                continue
            seen.add(y)
            todo.append(y)
    return seen


def window_vertices(window):
    lo, hi = window
    return [(x, y, z) for x in range(lo[0], hi[0] + 1)
            for y in range(lo[1], hi[1] + 1) for z in range(lo[2], hi[2] + 1)]


def window_border(window):
    lo, hi = window
    return [v for v in window_vertices(window)
            if any(v[i] in (lo[i], hi[i]) for i in range(3))]


def inside_outside(H, window=None) -> tuple[set[Vertex], set[Vertex]]:
    """Label the unit cubes of ``window`` (by centre vertex) inside/outside [H].

    Two neighbouring cubes communicate iff their common face is not in H;
    cubes connected to the window border are outside.
    """
    H = set(H)
    if window is None:
        window = default_window(H)
    lo, hi = window
    for h in H:
        for x in endpoints(h):
            if not all(lo[i] < x[i] < hi[i] for i in range(3)):
                raise ValueError("window too small: [H] must keep one cell of margin")
    outside = _flood(window, H, window_border(window))
    inside = set(window_vertices(window)) - outside
    return inside, outside


def edge_boundary(V) -> set[Edge]:
    V = set(V)
    out = set()
    for x in V:
        for i, d in enumerate(_DIRS):
            y = (x[0] + d[0], x[1] + d[1], x[2] + d[2])
            if y not in V:
                a = i // 2
                out.add((x[0], x[1], x[2], a) if d[a] > 0 else (y[0], y[1], y[2], a))
    return out


def is_connected_vertex_set(V) -> bool:
    V = set(V)
    if not V:
        return False
    start = next(iter(V))
    seen = {start}
    todo = [start]
    while todo:
        x = todo.pop()
        for d in _DIRS:
            y = (x[0] + d[0], x[1] + d[1], x[2] + d[2])
            if y in V and y not in seen:
                seen.add(y)
                todo.append(y)
    return len(seen) == len(V)


def splitting_set(V) -> set[Plaquette]:
    """1-connected part of the dual edge boundary of V enclosing V.

    Among the 1-connected components of the plaquettes dual to edges with
    exactly one endpoint in V, returns the innermost one whose inside
    contains V.
    """
    V = {tuple(v) for v in V}
    if not V:
        raise ValueError("V is empty")
    if not is_connected_vertex_set(V):
        raise ValueError("V is not connected")
    P = edge_boundary(V)
    window = default_window(P)
    x = min(V)
    best = None
    for comp in one_components(P):
        inside, _ = inside_outside(comp, window)
        if x in inside and (best is None or len(inside) < best[1]):
            best = (comp, len(inside))
    if best is None:
        raise RuntimeError("no component of the edge boundary encloses V")
    return best[0]


def check_splitting_set(V, Q) -> list[str]:
    """Failed postconditions of a splitting set for V (empty when all hold)."""
    V = {tuple(v) for v in V}
    failures = []
    P = edge_boundary(V)
    if not set(Q) <= P:
        failures.append("Q not within the dual edge boundary of V")
    if not is_one_connected(Q):
        failures.append("[Q] not 1-connected")
    window = default_window(P)
    inside, outside = inside_outside(Q, window)
    if not V <= inside:
        failures.append("V not inside [Q]")
    reachable = _flood(window, frozenset(), [v for v in window_border(window) if v not in V], avoid=V)
    if not reachable <= outside:
        failures.append("vertex reachable from infinity avoiding V is not outside [Q]")
    return failures


def complement_component(D, x, limit=None) -> set[Vertex] | None:
    """Component of x in (Z^3, E \\ D); None when it is infinite."""
    D = set(D)
    lo, hi = default_window(D, [x])
    window = (tuple(v - 1 for v in lo), tuple(v + 1 for v in hi))
    comp = _flood(window, D, [tuple(x)])
    if any(any(v[i] in (window[0][i], window[1][i]) for i in range(3)) for v in comp):
        return None
    return comp


def finite_complement_components(D) -> list[set[Vertex]]:
    D = set(D)
    if not D:
        return []
    window = default_window(D)
    outside = _flood(window, D, window_border(window))
    rest = set(window_vertices(window)) - outside
    comps = []
    while rest:
        x = min(rest)
        comp = _flood(window, D, [x])
        comps.append(comp)
        rest -= comp
    return comps


class BoundaryGraph(NamedTuple):
    vertices: set[Vertex]
    edges: set[Edge]
    connected: bool


def boundary_graph(C, delta_bar, delta) -> BoundaryGraph:
    """Vertices of C touching the extended set and C-edges dual to its rim."""
    C = {tuple(v) for v in C}
    delta = set(delta)
    delta_bar = set(delta_bar)
    if not C:
        raise ValueError("C is empty")
    comp = complement_component(delta, next(iter(C)))
    if comp is None or comp != C:
        raise ValueError("C is not a finite component of the complement of D")
    dv = set()
    for x in C:
        for i, d in enumerate(_DIRS):
            y = (x[0] + d[0], x[1] + d[1], x[2] + d[2])
            a = i // 2
            e = (x[0], x[1], x[2], a) if d[a] > 0 else (y[0], y[1], y[2], a)
            if e in delta_bar:
                dv.add(x)
                break
    rim = delta_bar - delta
    de = set()
    for x in C:
        for a in range(3):
            y = (x[0] + UNIT[a][0], x[1] + UNIT[a][1], x[2] + UNIT[a][2])
            e = (x[0], x[1], x[2], a)
            if y in C and e in rim:
                de.add(e)
    connected = True
    if dv:
        start = min(dv)
        seen = {start}
        todo = [start]
        while todo:
            x = todo.pop()
            for e in de:
                a, b = endpoints(e)
                for s, t in ((a, b), (b, a)):
                    if s == x and t not in seen:
                        seen.add(t)
                        todo.append(t)
        connected = seen == dv
    return BoundaryGraph(dv, de, connected)
