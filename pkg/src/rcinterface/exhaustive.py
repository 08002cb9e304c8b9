"""Exhaustive small-instance checks of the two enclosure propositions.

Both checks enumerate connected sets with Redelmeier's algorithm over a
fixed adjacency table and test each set on a padded voxel grid of side 9:

* splitting sets: every connected vertex set of size <= 6 in a 5x5x5 window
  has a 1-connected part Q of its dual edge boundary with V inside [Q] and
  everything reachable from infinity while avoiding V outside [Q];
* boundary graphs: for every 1-connected plaquette set D of size <= 8 in a
  4x4x4 dual window, each finite component C of the complement graph has
  a connected boundary graph.

For the second check a finite component with c vertices needs at least
``4c + 2`` boundary edges, so sets of at most 9 plaquettes can only
enclose single vertices, namely those whose six faces all lie in D.  These
are tracked incrementally during the enumeration; a full flood fill on
every set up to ``flood_upto`` plaquettes confirms that shortcut.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .lattice import endpoints
from .plaquettes import ONE_OFFSETS, corners2

G = 9
SHIFT = 2
DIRS = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=np.int64)
ONE = np.array([ONE_OFFSETS[a] for a in range(3)], dtype=np.int64)  # (3, 12, 4)


@njit(cache=True)
def _vid(x, y, z):
    return (x * G + y) * G + z


@njit(cache=True)
def _eid(x, y, z, a):
    return ((x * G + y) * G + z) * 3 + a


@njit(cache=True)
def _edge_between(x, y, z, d):
    """Grid edge id for the step from (x,y,z) in direction d (index into DIRS)."""
    a = d // 2
    if d % 2 == 0:
        return _eid(x, y, z, a)
    if a == 0:
        return _eid(x - 1, y, z, 0)
    if a == 1:
        return _eid(x, y - 1, z, 1)
    return _eid(x, y, z - 1, 2)


@njit(cache=True)
def _flood(blocked, avoid, reached, queue):
    """Vertices reachable from the grid border without crossing blocked faces or avoid-vertices."""
    n = G * G * G
    for i in range(n):
        reached[i] = False
    t = 0
    for x in range(G):
        for y in range(G):
            for z in range(G):
                if x == 0 or y == 0 or z == 0 or x == G - 1 or y == G - 1 or z == G - 1:
                    v = _vid(x, y, z)
                    if not avoid[v]:
                        reached[v] = True
                        queue[t] = v
                        t += 1
    h = 0
    while h < t:
        v = queue[h]
        h += 1
        z = v % G
        y = (v // G) % G
        x = v // (G * G)
        for d in range(6):
            nx = x + DIRS[d, 0]
            ny = y + DIRS[d, 1]
            nz = z + DIRS[d, 2]
            if nx < 0 or ny < 0 or nz < 0 or nx >= G or ny >= G or nz >= G:
                continue
            w = _vid(nx, ny, nz)
            if reached[w] or avoid[w]:
                continue
            if blocked[_edge_between(x, y, z, d)]:
                continue
            reached[w] = True
            queue[t] = w
            t += 1
    return t


@njit(cache=True)
def _decode_e(e):
    a = e % 3
    v = e // 3
    z = v % G
    y = (v // G) % G
    x = v // (G * G)
    return x, y, z, a


# --------------------------------------------------------- splitting sets

@njit(cache=True)
def _check_P(cur, size, vx, inV, inP, comp, plist, blocked, nothing, reached, best, queue, stack):
    ng = G * G * G
    for i in range(size):
        inV[cur[i]] = True
    # dual edge boundary
    npl = 0
    for i in range(size):
        v = cur[i]
        x, y, z = vx[v, 0], vx[v, 1], vx[v, 2]
        for d in range(6):
            w = _vid(x + DIRS[d, 0], y + DIRS[d, 1], z + DIRS[d, 2])
            if not inV[w]:
                e = _edge_between(x, y, z, d)
                if not inP[e]:
                    inP[e] = True
                    plist[npl] = e
                    npl += 1
    for i in range(npl):
        comp[plist[i]] = -1
    ncomp = 0
    for i in range(npl):
        if comp[plist[i]] >= 0:
            continue
        comp[plist[i]] = ncomp
        stack[0] = plist[i]
        top = 1
        while top > 0:
            top -= 1
            e = stack[top]
            x, y, z, a = _decode_e(e)
            for k in range(12):
                nx = x + ONE[a, k, 0]
                ny = y + ONE[a, k, 1]
                nz = z + ONE[a, k, 2]
                if nx < 0 or ny < 0 or nz < 0 or nx >= G or ny >= G or nz >= G:
                    continue
                f = _eid(nx, ny, nz, ONE[a, k, 3])
                if inP[f] and comp[f] < 0:
                    comp[f] = ncomp
                    stack[top] = f
                    top += 1
        ncomp += 1
    # innermost component whose inside holds V
    bestc = -1
    bestn = ng + 1
    for c in range(ncomp):
        for i in range(npl):
            blocked[plist[i]] = comp[plist[i]] == c
        t = _flood(blocked, nothing, reached, queue)
        ok = True
        for i in range(size):
            if reached[cur[i]]:
                ok = False
        if ok and ng - t < bestn:
            bestn = ng - t
            bestc = c
            for j in range(ng):
                best[j] = reached[j]
    good = bestc >= 0
    if good:
        for i in range(npl):
            blocked[plist[i]] = False
        _flood(blocked, inV, reached, queue)
        for j in range(ng):
            if reached[j] and not best[j]:
                good = False
                break
    for i in range(npl):
        inP[plist[i]] = False
        blocked[plist[i]] = False
    for i in range(size):
        inV[cur[i]] = False
    return good


@njit(cache=True)
def _verify_P(adj, vx, K):
    n = adj.shape[0]
    deg = adj.shape[1]
    counts = np.zeros(K + 1, np.int64)
    fails = np.zeros(K + 1, np.int64)
    ng = G * G * G
    inV = np.zeros(ng, np.bool_)
    nothing = np.zeros(ng, np.bool_)
    reached = np.zeros(ng, np.bool_)
    best = np.zeros(ng, np.bool_)
    queue = np.empty(ng, np.int64)
    inP = np.zeros(ng * 3, np.bool_)
    blocked = np.zeros(ng * 3, np.bool_)
    comp = np.full(ng * 3, -1, np.int64)
    plist = np.empty(6 * K, np.int64)
    stack = np.empty(ng * 3, np.int64)
    cur = np.empty(K, np.int64)
    gcur = np.empty(K, np.int64)
    unt = np.empty((K + 1, n), np.int64)
    un = np.zeros(K + 1, np.int64)
    ptr = np.zeros(K + 1, np.int64)
    added = np.empty((K + 1, deg), np.int64)
    nadd = np.zeros(K + 1, np.int64)
    mark = np.zeros(n, np.int64)
    gx = vx_grid(vx)
    for root in range(n):
        for i in range(n):
            mark[i] = 2 if i < root else 0
        unt[0, 0] = root
        un[0] = 1
        ptr[0] = 0
        nadd[0] = 0
        mark[root] = 1
        lvl = 0
        while lvl >= 0:
            if ptr[lvl] < un[lvl]:
                c = unt[lvl, ptr[lvl]]
                ptr[lvl] += 1
                cur[lvl] = c
                size = lvl + 1
                counts[size] += 1
                for i in range(size):
                    v = cur[i]
                    gcur[i] = _vid(vx[v, 0], vx[v, 1], vx[v, 2])
                if not _check_P(gcur, size, gx, inV, inP, comp, plist, blocked,
                                nothing, reached, best, queue, stack):
                    fails[size] += 1
                if size < K:
                    m = 0
                    for t in range(ptr[lvl], un[lvl]):
                        unt[lvl + 1, m] = unt[lvl, t]
                        m += 1
                    na = 0
                    for d in range(deg):
                        nb = adj[c, d]
                        if nb >= 0 and mark[nb] == 0:
                            mark[nb] = 1
                            unt[lvl + 1, m] = nb
                            m += 1
                            added[lvl + 1, na] = nb
                            na += 1
                    nadd[lvl + 1] = na
                    un[lvl + 1] = m
                    ptr[lvl + 1] = 0
                    lvl += 1
            else:
                for t in range(nadd[lvl]):
                    mark[added[lvl, t]] = 0
                nadd[lvl] = 0
                lvl -= 1
    return counts, fails


@njit(cache=True)
def vx_grid(vx):
    """Grid coordinates of every grid vertex id (identity layout)."""
    out = np.empty((G * G * G, 3), np.int64)
    for x in range(G):
        for y in range(G):
            for z in range(G):
                v = _vid(x, y, z)
                out[v, 0] = x
                out[v, 1] = y
                out[v, 2] = z
    return out


def vertex_window(side=5):
    verts = [(x, y, z) for x in range(side) for y in range(side) for z in range(side)]
    idx = {v: i for i, v in enumerate(verts)}
    adj = -np.ones((len(verts), 6), dtype=np.int64)
    for i, v in enumerate(verts):
        k = 0
        for d in DIRS:
            w = (v[0] + d[0], v[1] + d[1], v[2] + d[2])
            if w in idx:
                adj[i, k] = idx[w]
                k += 1
    vx = np.array([[c + SHIFT for c in v] for v in verts], dtype=np.int64)
    return verts, adj, vx


def verify_splitting_sets(max_size=6, side=5):
    """(counts by size, failures by size) over all connected vertex sets."""
    _, adj, vx = vertex_window(side)
    return _verify_P(adj, vx, max_size)


# -------------------------------------------------------- boundary graphs

@njit(cache=True)
def _in_bar(f, inD):
    if inD[f]:
        return True
    x, y, z, a = _decode_e(f)
    for k in range(12):
        nx = x + ONE[a, k, 0]
        ny = y + ONE[a, k, 1]
        nz = z + ONE[a, k, 2]
        if nx < 0 or ny < 0 or nz < 0 or nx >= G or ny >= G or nz >= G:
            continue
        if inD[_eid(nx, ny, nz, ONE[a, k, 3])]:
            return True
    return False


@njit(cache=True)
def _boundary_connected(v0, inD, inC, clist, queue, seen):
    """Flood the complement component of v0; return (finite, size, boundary graph connected)."""
    nC = 0
    inC[v0] = True
    clist[0] = v0
    nC = 1
    h = 0
    finite = True
    while h < nC:
        v = clist[h]
        h += 1
        z = v % G
        y = (v // G) % G
        x = v // (G * G)
        if x == 0 or y == 0 or z == 0 or x == G - 1 or y == G - 1 or z == G - 1:
            finite = False
            continue
        for d in range(6):
            if inD[_edge_between(x, y, z, d)]:
                continue
            w = _vid(x + DIRS[d, 0], y + DIRS[d, 1], z + DIRS[d, 2])
            if not inC[w]:
                inC[w] = True
                clist[nC] = w
                nC += 1
    connected = True
    if finite:
        # boundary vertices: members of C with an incident edge in the extended set
        nb = 0
        start = -1
        for i in range(nC):
            v = clist[i]
            z = v % G
            y = (v // G) % G
            x = v // (G * G)
            isb = False
            for d in range(6):
                if _in_bar(_edge_between(x, y, z, d), inD):
                    isb = True
                    break
            seen[v] = 0
            if isb:
                seen[v] = 1
                nb += 1
                start = v
        if nb > 0:
            seen[start] = 2
            queue[0] = start
            t = 1
            hh = 0
            got = 1
            while hh < t:
                v = queue[hh]
                hh += 1
                z = v % G
                y = (v // G) % G
                x = v // (G * G)
                for d in range(6):
                    f = _edge_between(x, y, z, d)
                    if inD[f] or not _in_bar(f, inD):
                        continue
                    w = _vid(x + DIRS[d, 0], y + DIRS[d, 1], z + DIRS[d, 2])
                    if inC[w] and seen[w] == 1:
                        seen[w] = 2
                        got += 1
                        queue[t] = w
                        t += 1
            connected = got == nb
        for i in range(nC):
            seen[clist[i]] = 0
    for i in range(nC):
        inC[clist[i]] = False
    return finite, nC, connected


@njit(cache=True)
def _verify_Q(adj, pe, pu, pv, K, flood_upto):
    n = adj.shape[0]
    deg = adj.shape[1]
    ng = G * G * G
    counts = np.zeros(K + 1, np.int64)
    fails = np.zeros(K + 1, np.int64)
    cavities = np.zeros(K + 1, np.int64)
    mismatches = np.zeros(K + 1, np.int64)
    inD = np.zeros(ng * 3, np.bool_)
    faces = np.zeros(ng, np.int64)
    inC = np.zeros(ng, np.bool_)
    seen = np.zeros(ng, np.int64)
    clist = np.empty(ng, np.int64)
    queue = np.empty(ng, np.int64)
    reached = np.zeros(ng, np.bool_)
    nothing = np.zeros(ng, np.bool_)
    cavmark = np.zeros(ng, np.int64)
    setno = 0
    cur = np.empty(K, np.int64)
    unt = np.empty((K + 1, n), np.int64)
    un = np.zeros(K + 1, np.int64)
    ptr = np.zeros(K + 1, np.int64)
    added = np.empty((K + 1, deg), np.int64)
    nadd = np.zeros(K + 1, np.int64)
    mark = np.zeros(n, np.int64)
    for root in range(n):
        for i in range(n):
            mark[i] = 2 if i < root else 0
        unt[0, 0] = root
        un[0] = 1
        ptr[0] = 0
        nadd[0] = 0
        mark[root] = 1
        lvl = 0
        while lvl >= 0:
            if ptr[lvl] < un[lvl]:
                if ptr[lvl] > 0:
                    # retract the previous choice at this level
                    c0 = cur[lvl]
                    inD[pe[c0]] = False
                    faces[pu[c0]] -= 1
                    faces[pv[c0]] -= 1
                c = unt[lvl, ptr[lvl]]
                ptr[lvl] += 1
                cur[lvl] = c
                inD[pe[c]] = True
                faces[pu[c]] += 1
                faces[pv[c]] += 1
                size = lvl + 1
                counts[size] += 1
                ncav = 0
                setno += 1
                for i in range(2 * size):
                    v = pu[cur[i // 2]] if i % 2 == 0 else pv[cur[i // 2]]
                    if faces[v] == 6 and cavmark[v] != setno:
                        cavmark[v] = setno
                        fin, nC, conn = _boundary_connected(v, inD, inC, clist, queue, seen)
                        if fin:
                            ncav += 1
                            if not conn:
                                fails[size] += 1
                cavities[size] += ncav
                if size <= flood_upto:
                    t = _flood(inD, nothing, reached, queue)
                    inner = 0
                    for x in range(1, G - 1):
                        for y in range(1, G - 1):
                            for z in range(1, G - 1):
                                w = _vid(x, y, z)
                                if not reached[w] and not inC[w]:
                                    fin, nC, conn = _boundary_connected(w, inD, inC, clist, queue, seen)
                                    for j in range(nC):
                                        inC[clist[j]] = True
                                    inner += 1
                    for x in range(G):
                        for y in range(G):
                            for z in range(G):
                                inC[_vid(x, y, z)] = False
                    if inner != ncav:
                        mismatches[size] += 1
                if size < K:
                    m = 0
                    for t in range(ptr[lvl], un[lvl]):
                        unt[lvl + 1, m] = unt[lvl, t]
                        m += 1
                    na = 0
                    for d in range(deg):
                        nb = adj[c, d]
                        if nb >= 0 and mark[nb] == 0:
                            mark[nb] = 1
                            unt[lvl + 1, m] = nb
                            m += 1
                            added[lvl + 1, na] = nb
                            na += 1
                    nadd[lvl + 1] = na
                    un[lvl + 1] = m
                    ptr[lvl + 1] = 0
                    lvl += 1
            else:
                if ptr[lvl] > 0:
                    c0 = cur[lvl]
                    inD[pe[c0]] = False
                    faces[pu[c0]] -= 1
                    faces[pv[c0]] -= 1
                for t in range(nadd[lvl]):
                    mark[added[lvl, t]] = 0
                nadd[lvl] = 0
                lvl -= 1
    return counts, fails, cavities, mismatches


def dual_window(side=4):
    """Plaquettes whose corners lie in the dual cube with ``side`` cells per axis."""
    plaq = []
    for a in range(3):
        for x in range(-1, side + 1):
            for y in range(-1, side + 1):
                for z in range(-1, side + 1):
                    h = (x, y, z, a)
                    if all(1 <= c <= 2 * side - 1 for cc in corners2(h) for c in cc):
                        plaq.append(h)
    idx = {h: i for i, h in enumerate(plaq)}
    adj = -np.ones((len(plaq), 12), dtype=np.int64)
    for i, h in enumerate(plaq):
        k = 0
        for dx, dy, dz, b in ONE_OFFSETS[h[3]]:
            g = (h[0] + dx, h[1] + dy, h[2] + dz, b)
            if g in idx:
                adj[i, k] = idx[g]
                k += 1
    pe = np.empty(len(plaq), np.int64)
    pu = np.empty(len(plaq), np.int64)
    pv = np.empty(len(plaq), np.int64)
    for i, h in enumerate(plaq):
        x, y, z, a = (h[0] + SHIFT, h[1] + SHIFT, h[2] + SHIFT, h[3])
        pe[i] = ((x * G + y) * G + z) * 3 + a
        u, v = endpoints((x, y, z, a))
        pu[i] = (u[0] * G + u[1]) * G + u[2]
        pv[i] = (v[0] * G + v[1]) * G + v[2]
    return plaq, adj, pe, pu, pv


def verify_boundary_graphs(max_size=8, side=4, flood_upto=6):
    """(counts, failures, cavities, shortcut mismatches), each indexed by set size."""
    if max_size > 9:
        raise ValueError("the single-vertex cavity shortcut needs at most 9 plaquettes")
    _, adj, pe, pu, pv = dual_window(side)
    return _verify_Q(adj, pe, pu, pv, max_size, flood_upto)
