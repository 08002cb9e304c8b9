"""Interfaces: extraction, ceilings and walls, standard walls and groups.

An interface is stored as a finite difference against the flat plane
``delta0`` of horizontal plaquettes at height 1/2: ``extra`` holds its
plaquettes that are not in ``delta0`` and ``missing`` the cells whose flat
plaquette is absent.  Plaquettes over cells far from both sets are
implicitly flat.  Cells are pairs ``(x1, x2)``; the flat plaquette over a
cell is ``(x1, x2, 0, 2)`` and a horizontal plaquette ``(x1, x2, z, 2)``
sits at height ``z + 1/2``.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .lattice import Box, EdgeConfiguration, crossing_exists, mu
from .plaquettes import (ONE_OFFSETS, extend, neighbours0, neighbours1,
                         projection_cells, zero_components)

MARGIN = 2

N4 = ((1, 0), (-1, 0), (0, 1), (0, -1))
N8 = N4 + ((1, 1), (1, -1), (-1, 1), (-1, -1))


class NotInI(ValueError):
    """The configuration has an open crossing, so it has no interface."""


class InadmissibleFamily(ValueError):
    def __init__(self, clause, detail=""):
        super().__init__(f"admissibility clause ({clause}) fails: {detail}")
        self.clause = clause


def flat(cell):
    return (cell[0], cell[1], 0, 2)


def is_flat(h) -> bool:
    return h[3] == 2 and h[2] == 0


def lex_key(cell):
    return cell


def relative_key(h):
    """Ordering of cells by L-infinity distance to ``h``, then lexicographically."""
    def key(cell):
        return (max(abs(cell[0] - h[0]), abs(cell[1] - h[1])), cell)
    return key


def cell_components(cells, steps=N8) -> list[set]:
    cells = set(cells)
    comps = []
    while cells:
        c = min(cells)
        comp = {c}
        cells.discard(c)
        todo = [c]
        while todo:
            x = todo.pop()
            for d in steps:
                y = (x[0] + d[0], x[1] + d[1])
                if y in cells:
                    cells.discard(y)
                    comp.add(y)
                    todo.append(y)
        comps.append(comp)
    return comps


def cell_dist(a, b) -> int:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def _rect(lo, hi):
    return [(x, y) for x in range(lo[0], hi[0] + 1) for y in range(lo[1], hi[1] + 1)]


def interior_of(pi, region_lo, region_hi) -> frozenset:
    """Cells not in the unbounded 0-connected component of the complement of ``pi``."""
    pi = set(pi)
    outer = set()
    todo = [c for c in _rect(region_lo, region_hi)
            if (c[0] in (region_lo[0], region_hi[0]) or c[1] in (region_lo[1], region_hi[1]))
            and c not in pi]
    outer.update(todo)
    while todo:
        x = todo.pop()
        for d in N8:
            y = (x[0] + d[0], x[1] + d[1])
            if (region_lo[0] <= y[0] <= region_hi[0] and region_lo[1] <= y[1] <= region_hi[1]
                    and y not in pi and y not in outer):
                outer.add(y)
                todo.append(y)
    return frozenset(c for c in _rect(region_lo, region_hi) if c not in outer)


def _bbox_cells(cells, margin):
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    return (min(xs) - margin, min(ys) - margin), (max(xs) + margin, max(ys) + margin)


@dataclass(frozen=True)
class Interface:
    """A 1-connected plaquette set that equals ``delta0`` far away."""

    extra: frozenset = frozenset()
    missing: frozenset = frozenset()

    @classmethod
    def regular(cls) -> "Interface":
        return cls()

    @classmethod
    def from_plaquettes(cls, plaquettes, region=None) -> "Interface":
        """Canonical form of a set given explicitly over ``region`` (a set of cells).

        Flat plaquettes over cells outside ``region`` are implied.
        """
        plaquettes = set(plaquettes)
        extra = frozenset(h for h in plaquettes if not is_flat(h))
        if region is None:
            region = {(h[0], h[1]) for h in plaquettes}
        missing = frozenset(c for c in region if flat(c) not in plaquettes)
        return cls(extra, missing)

    def __contains__(self, h) -> bool:
        if is_flat(h):
            return (h[0], h[1]) not in self.missing
        return h in self.extra

    @cached_property
    def support(self) -> set:
        cells = set(self.missing)
        for h in self.extra:
            cells.update(projection_cells(h))
        return cells

    def window(self, margin=MARGIN, include=()):
        cells = set(self.support) | set(include)
        if not cells:
            cells = {(0, 0)}
        return _bbox_cells(cells, margin)

    def materialize(self, lo, hi) -> set:
        out = set(self.extra)
        for c in _rect(lo, hi):
            if c not in self.missing:
                out.add(flat(c))
        return out

    def translate(self, dz) -> "Interface":
        return Interface.from_plaquettes(
            {(h[0], h[1], h[2] + dz, h[3]) for h in self.materialize(*self.window())},
            set(_rect(*self.window())))

    # ------------------------------------------------------------- dumps

    def to_json(self, box: Box | None = None) -> str:
        doc = {"format": "rc-interface/1"}
        if box is not None:
            doc["box"] = {"L": box.L, "M": box.M}
            dual = sorted(h for h in self.materialize(*self.window(include=_box_cells(box)))
                          if h in box.edge_index)
        else:
            dual = sorted(self.materialize(*self.window()))
        doc["dual_edges"] = [list(h) for h in dual]
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> tuple["Interface", Box | None]:
        doc = json.loads(text)
        if doc.get("format") != "rc-interface/1":
            raise ValueError("not an rc-interface/1 document")
        plaq = [tuple(h) for h in doc["dual_edges"]]
        if "box" in doc:
            box = Box(doc["box"]["L"], doc["box"]["M"])
            bad = [h for h in plaq if h not in box.edge_index]
            if bad:
                raise ValueError(f"plaquette {bad[0]} is not dual to a box edge")
            region = {(x, y) for x in range(-box.L, box.L + 1) for y in range(-box.L, box.L + 1)}
            return cls.from_plaquettes(plaq, region), box
        return cls.from_plaquettes(plaq), None


def _box_cells(box):
    return [(x, y) for x in range(-box.L, box.L + 1) for y in range(-box.L, box.L + 1)]


# ------------------------------------------------------------ extraction

def extract_interface(omega: EdgeConfiguration) -> Interface:
    """The maximal 1-connected set of open plaquettes containing delta0 off the box."""
    box = omega.box
    if crossing_exists(omega):
        raise NotInI("an open path joins the upper and lower boundaries")
    L = box.L
    R = L + 2
    index = box.edge_index
    bits = omega.bits

    def is_open(h):
        i = index.get(h)
        if i is None:
            return mu(h) == 0
        return not bits[i]

    seeds = [flat((x, y)) for x in range(-L - 1, L + 2) for y in range(-L - 1, L + 2)
             if max(abs(x), abs(y)) == L + 1]
    seen = set(seeds)
    todo = deque(seeds)
    while todo:
        h = todo.popleft()
        x, y, z, a = h
        for dx, dy, dz, b in ONE_OFFSETS[a]:
            g = (x + dx, y + dy, z + dz, b)
            if g in seen or abs(g[0]) > R or abs(g[1]) > R:
                continue
            if is_open(g):
                seen.add(g)
                todo.append(g)
    region = set(_rect((-R, -R), (R, R)))
    return Interface.from_plaquettes(seen, region)


def omega_bar(box: Box, delta: Interface) -> EdgeConfiguration:
    """All box edges open except those dual to plaquettes of delta."""
    closed = [h for h in delta.materialize(*delta.window(include=_box_cells(box)))
              if h in box.edge_index]
    return EdgeConfiguration.maximal(box, closed)


def box_parts(box: Box, delta: Interface):
    """(delta, extended minus delta, W(delta)) as box edge lists."""
    lo, hi = delta.window(include=_box_cells(box))
    d = delta.materialize(lo, hi)
    dbar = extend(d)
    idx = box.edge_index
    D = [h for h in d if h in idx]
    R = [h for h in dbar - d if h in idx]
    Wd = [e for e in box.edges if e not in dbar]
    return D, R, Wd


def K_delta(box: Box, delta: Interface) -> int:
    return omega_bar(box, delta).cluster_count()


# -------------------------------------------------------- classification

@dataclass
class Ceiling:
    plaquettes: frozenset
    height: int

    @cached_property
    def pi(self) -> frozenset:
        return frozenset((h[0], h[1]) for h in self.plaquettes)


@dataclass
class Wall:
    plaquettes: frozenset
    A: frozenset
    B: frozenset
    pi: frozenset
    interior: frozenset
    base: int | None = None
    altitude: int | None = None

    @property
    def height(self) -> int:
        return wall_height(self.plaquettes, self.altitude)


def wall_height(plaquettes, s) -> int:
    d = 0
    for h in plaquettes:
        z = h[2]
        if h[3] == 2:
            d = max(d, abs(z - s))
        else:
            d = max(d, abs(z - s), abs(z - 1 - s))
    return d


@dataclass
class Classification:
    lo: tuple
    hi: tuple
    delta: set
    star: set
    c: set
    w: set
    ceilings: list
    walls: list

    def ceiling_of(self) -> dict:
        out = {}
        for i, C in enumerate(self.ceilings):
            for h in C.plaquettes:
                out[h] = i
        return out


def classify(delta: Interface, margin=MARGIN, include=()) -> Classification:
    """Split the semi-extended interface into c- and w-plaquettes, ceilings and walls."""
    lo, hi = delta.window(margin, include)
    d = delta.materialize(lo, hi)
    star = set(d)
    for h in d:
        for g in neighbours1(h):
            if g[3] == 2 and lo[0] <= g[0] <= hi[0] and lo[1] <= g[1] <= hi[1]:
                star.add(g)
    count = {}
    for h in star:
        if h[3] == 2:
            count[(h[0], h[1])] = count.get((h[0], h[1]), 0) + 1
    c = {h for h in star if h[3] == 2 and count[(h[0], h[1])] == 1}
    w = star - c
    ceilings = [Ceiling(frozenset(C), next(iter(C))[2]) for C in zero_components(c)]
    cl = Classification(lo, hi, d, star, c, w, ceilings, [])
    owner = cl.ceiling_of()
    for comp in zero_components(w):
        pi = frozenset((h[0], h[1]) for h in comp if h[3] == 2)
        interior = interior_of(pi, lo, hi)
        wall = Wall(frozenset(comp), frozenset(comp & d), frozenset(comp - d), pi, interior)
        bases = set()
        for h in comp:
            for g in neighbours0(h):
                i = owner.get(g)
                if i is not None and (g[0], g[1]) not in interior:
                    bases.add(i)
        if len(bases) == 1:
            wall.base = bases.pop()
            wall.altitude = ceilings[wall.base].height
        elif bases:
            heights = {ceilings[i].height for i in bases}
            if len(heights) == 1:
                wall.base = min(bases)
                wall.altitude = heights.pop()
        cl.walls.append(wall)
    cl.walls.sort(key=lambda W: min(W.plaquettes))
    return cl


def check_properties(delta: Interface, cl: Classification | None = None) -> list[str]:
    """Names of the failing structural clauses (i)-(vi), (viii), (ix)."""
    cl = cl or classify(delta)
    fails = []
    d, star, c = cl.delta, cl.star, cl.c
    lo, hi = cl.lo, cl.hi

    def inside(h):
        return lo[0] <= h[0] <= hi[0] and lo[1] <= h[1] <= hi[1]

    if any(h not in d for h in c):
        fails.append("(i) c-plaquette outside delta")
    for h in c:
        for g in neighbours1(h):
            if g in star and not (g[3] == 2 and g in d):
                fails.append(f"(ii) {g} 1-connected to c-plaquette {h}")
                break
        for g in neighbours0(h):
            if g[3] == 2 and inside(g) and g not in star:
                fails.append(f"(ii) horizontal {g} 0-connected to {h} not in delta*")
                break
    for C in cl.ceilings:
        if len({h[2] for h in C.plaquettes}) != 1:
            fails.append("(iii) ceiling not planar")
        rim = {g for h in C.plaquettes for g in neighbours0(h)
               if g[3] == 2 and g not in C.plaquettes and inside(g)}
        if not rim <= star:
            fails.append("(iii) horizontal rim of a ceiling leaves delta*")
        got = {h for h in star if any(x in C.pi for x in projection_cells(h))}
        if got != set(C.plaquettes):
            fails.append("(iv) plaquettes over a ceiling differ from the ceiling")
    for W in cl.walls:
        got = {h for h in star if any(x in W.pi for x in projection_cells(h))}
        if got != set(W.plaquettes):
            fails.append("(v) plaquettes over a wall differ from the wall")
        rest = set(_rect(lo, hi)) - set(W.pi)
        for steps, name in ((N8, "0"), (N4, "1")):
            border = [comp for comp in cell_components(rest, steps)
                      if any(x[0] in (lo[0], hi[0]) or x[1] in (lo[1], hi[1]) for x in comp)]
            if len(border) != 1:
                fails.append(f"(vi) {len(border)} unbounded {name}-connected complements")
        if not W.pi:
            fails.append("(ix) wall with empty projection")
        if W.altitude is None:
            fails.append("wall without a base")
    for W1, W2 in itertools.combinations(cl.walls, 2):
        if _zero_touch(W1.pi, W2.pi):
            fails.append("(viii) projections of two walls are 0-connected")
    return fails


def _zero_touch(P1, P2) -> bool:
    for x in P1:
        if x in P2:
            return True
        for d in N8:
            if (x[0] + d[0], x[1] + d[1]) in P2:
                return True
    return False


# --------------------------------------------------------- standard walls

@dataclass(frozen=True)
class StandardWall:
    """A wall translated to altitude 0: A in the interface, B in delta* only."""

    A: frozenset
    B: frozenset
    origin: tuple = field(compare=False, default=None)

    @cached_property
    def plaquettes(self) -> frozenset:
        return self.A | self.B

    @cached_property
    def pi(self) -> frozenset:
        return frozenset((h[0], h[1]) for h in self.plaquettes if h[3] == 2)

    @property
    def N(self) -> int:
        return len(self.A)

    @property
    def Pi(self) -> int:
        return self.N - len(self.pi)

    @property
    def D(self) -> int:
        return wall_height(self.plaquettes, 0)

    @cached_property
    def interior(self) -> frozenset:
        lo, hi = _bbox_cells(self.pi, 1)
        return interior_of(self.pi, lo, hi)

    def find_origin(self, key=lex_key):
        edge = [c for c in self.pi
                if any((c[0] + d[0], c[1] + d[1]) not in self.pi for d in N4)]
        return min(edge, key=key)

    def with_origin(self, key=lex_key) -> "StandardWall":
        return StandardWall(self.A, self.B, self.find_origin(key))

    def inequalities(self) -> list[str]:
        fails = []
        n, p = self.N, len(self.pi)
        if 13 * n < 14 * p:
            fails.append("N >= 14/13 |pi|")
        if 13 * self.Pi < p:
            fails.append("Pi >= |pi|/13")
        if 14 * self.Pi < n:
            fails.append("Pi >= N/14")
        if 5 * n < len(self.plaquettes):
            fails.append("N >= |S|/5")
        if self.Pi < self.D:
            fails.append("Pi >= D")
        return fails


def standardize(wall: Wall, key=lex_key) -> StandardWall:
    s = wall.altitude
    if s is None:
        raise ValueError("wall has no base")

    def sh(H):
        return frozenset((h[0], h[1], h[2] - s, h[3]) for h in H)

    return StandardWall(sh(wall.A), sh(wall.B)).with_origin(key)


_DELTA_S: dict = {}


def standard_interface(S: StandardWall) -> Interface:
    """The unique interface whose only wall is S (cached)."""
    k = (S.A, S.B)
    hit = _DELTA_S.get(k)
    if hit is not None:
        return hit
    interior = S.interior
    holes = cell_components(interior - S.pi, N8)
    cands = []
    for H in holes:
        t = sorted({g[2] for a in S.A for g in neighbours1(a)
                    if g[3] == 2 and (g[0], g[1]) in H})
        if not t:
            raise ValueError("no ceiling height for a hole of the wall")
        cands.append(t)
    target = S.plaquettes
    for combo in itertools.product(*cands):
        extra = {h for h in S.A if not is_flat(h)}
        missing = set(S.pi) - {(h[0], h[1]) for h in S.A if is_flat(h)}
        for H, t in zip(holes, combo):
            if t != 0:
                missing |= H
                extra |= {(c[0], c[1], t, 2) for c in H}
        delta = Interface(frozenset(extra), frozenset(missing))
        cl = classify(delta)
        if (len(cl.walls) == 1 and cl.walls[0].plaquettes == target
                and cl.walls[0].A == S.A and cl.walls[0].altitude == 0):
            _DELTA_S[k] = delta
            return delta
    raise ValueError("(A, B) is not a standard wall")


def rho(cell, delta: Interface) -> int:
    """Plaquettes of delta whose projection lies in the closed cell."""
    n = 0 if cell in delta.missing else 1
    for h in delta.extra:
        if cell in projection_cells(h):
            n += 1
    return n


def _patch(S: StandardWall) -> set:
    """Plaquettes of delta_S projecting into the closure of int(S)."""
    dS = standard_interface(S)
    lo, hi = dS.window(include=S.interior)
    return {h for h in dS.materialize(lo, hi)
            if any(c in S.interior for c in projection_cells(h))}


# ------------------------------------------------------------ families

@dataclass
class WallFamily:
    """Non-empty standard walls keyed by origin cell; absent cells carry the empty wall."""

    walls: dict
    L: int | None = None

    def __eq__(self, other):
        return (isinstance(other, WallFamily)
                and {k: (v.A, v.B) for k, v in self.walls.items()}
                == {k: (v.A, v.B) for k, v in other.walls.items()})

    @property
    def Pi(self) -> int:
        return sum(S.Pi for S in self.walls.values())

    def at(self, cell):
        return self.walls.get(cell)


def decompose(delta: Interface, L=None, key=lex_key) -> WallFamily:
    cl = classify(delta)
    walls = {}
    for W in cl.walls:
        S = standardize(W, key)
        walls[S.origin] = S
    return WallFamily(walls, L)


def check_admissible(family: WallFamily):
    ws = list(family.walls.values())
    for S1, S2 in itertools.combinations(ws, 2):
        if _zero_touch(S1.pi, S2.pi):
            raise InadmissibleFamily("i", f"walls at {S1.origin} and {S2.origin}")
    if family.L is not None:
        L = family.L
        for S in ws:
            for h in S.plaquettes:
                # the dual edge leaves the cylinder iff both endpoint columns do
                if all(max(abs(c[0]), abs(c[1])) > L for c in projection_cells(h)):
                    if (h in S.A) != (mu(h) == 0):
                        raise InadmissibleFamily("ii", f"plaquette {h} off the cylinder")


def reconstruct(family: WallFamily) -> Interface:
    """Glue the walls of an admissible family back into one interface."""
    check_admissible(family)
    ws = sorted(family.walls.values(), key=lambda S: (len(S.interior), min(S.pi)))
    patches = [_patch(S) for S in ws]
    absorbed = [False] * len(ws)
    for i, Si in enumerate(ws):
        for j in range(i + 1, len(ws)):
            Sj = ws[j]
            if Si.interior <= Sj.interior:
                cell = min(Si.pi)
                levels = [h[2] for h in patches[j] if h[3] == 2 and (h[0], h[1]) == cell]
                if len(levels) != 1:
                    raise InadmissibleFamily("i", "nested wall does not sit on a ceiling")
                t = levels[0]
                keep = {h for h in patches[j]
                        if not (h[3] == 2 and (h[0], h[1]) in Si.interior)}
                patches[j] = keep | {(h[0], h[1], h[2] + t, h[3]) for h in patches[i]}
                absorbed[i] = True
                break
    extra, missing = set(), set()
    for S, P, a in zip(ws, patches, absorbed):
        if a:
            continue
        missing |= S.interior
        extra |= P
    plaq = extra | {flat(c) for c in missing if flat(c) in extra}
    missing -= {(h[0], h[1]) for h in extra if is_flat(h)}
    return Interface(frozenset(h for h in plaq if not is_flat(h)), frozenset(missing))


# -------------------------------------------------------------- groups

def close(S1: StandardWall, S2: StandardWall) -> bool:
    d1, d2 = standard_interface(S1), standard_interface(S2)
    r1 = {c: math.sqrt(rho(c, d1)) for c in S1.pi}
    r2 = {c: math.sqrt(rho(c, d2)) for c in S2.pi}
    for a, ra in r1.items():
        for b, rb in r2.items():
            if cell_dist(a, b) < ra + rb:
                return True
    return False


@dataclass
class WallGroup:
    walls: tuple
    origin: tuple

    @property
    def Pi(self) -> int:
        return sum(S.Pi for S in self.walls)

    @property
    def N(self) -> int:
        return sum(S.N for S in self.walls)

    @property
    def pi(self) -> frozenset:
        return frozenset().union(*(S.pi for S in self.walls))


def group(family: WallFamily, key=lex_key) -> dict:
    """Groups of walls keyed by origin: components of the closeness relation."""
    ws = sorted(family.walls.values(), key=lambda S: key(S.origin))
    n = len(ws)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(n), 2):
        if find(i) != find(j) and close(ws[i], ws[j]):
            parent[find(j)] = find(i)
    comps = {}
    for i in range(n):
        comps.setdefault(find(i), []).append(ws[i])
    out = {}
    for members in comps.values():
        o = min((S.origin for S in members), key=key)
        out[o] = WallGroup(tuple(members), o)
    return out


# ----------------------------------------------------------- observables

def displacement(cell, delta: Interface) -> int:
    """Largest |height - 1/2| of [delta] on the vertical line through the cell centre."""
    d = 0 if cell not in delta.missing else None
    for h in delta.extra:
        if h[3] == 2 and (h[0], h[1]) == tuple(cell):
            d = abs(h[2]) if d is None else max(d, abs(h[2]))
    if d is None:
        raise ValueError("no horizontal plaquette over the cell")
    return d


def h_to_infinity(delta: Interface, cell, L, cl: Classification | None = None) -> bool:
    """Whether a 4-connected path of flat c-plaquettes joins ``cell`` to a cell off the box."""
    cl = cl or classify(delta, include=[(L + 1, L + 1), (-L - 1, -L - 1)])
    ok = {(h[0], h[1]) for h in cl.c if is_flat(h)}
    cell = tuple(cell)
    if cell not in ok:
        return False
    seen = {cell}
    todo = [cell]
    while todo:
        x = todo.pop()
        if max(abs(x[0]), abs(x[1])) > L:
            return True
        for d in N4:
            y = (x[0] + d[0], x[1] + d[1])
            if y in ok and y not in seen:
                seen.add(y)
                todo.append(y)
    return False


def bump(cell=(0, 0), up=True) -> Interface:
    """delta0 with its plaquette over ``cell`` pushed one unit up (or down)."""
    x, y = cell
    if up:
        extra = {(x, y, 1, 2), (x, y, 1, 0), (x - 1, y, 1, 0), (x, y, 1, 1), (x, y - 1, 1, 1)}
    else:
        extra = {(x, y, -1, 2), (x, y, 0, 0), (x - 1, y, 0, 0), (x, y, 0, 1), (x, y - 1, 0, 1)}
    return Interface(frozenset(extra), frozenset({(x, y)}))
