"""Monte Carlo experiments: rigidity, displacement tails and wall-group statistics.

Each parameter point runs one chain; every measurement yields a vector of
per-sample observables whose means are reported with standard errors
corrected by the integrated autocorrelation time.  Output rows are sorted
by parameters then estimator name, and floats are written with 17
significant digits so identical seeds give identical bytes.
"""

from __future__ import annotations

import copy
import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .interface import (N4, classify, decompose, displacement, extract_interface, group,
                        h_to_infinity)
from .mc import SamplerConfig, sample

log = logging.getLogger(__name__)

KINDS = ("rigidity", "displacement", "wall-stats")
COLUMNS = ("kind", "p", "q", "L", "M", "estimator", "value", "stderr", "n_samples", "n_eff")
MIN_EFF = 100
THREADS_ENV = "RCINTERFACE_THREADS"

DEFAULTS = {
    "rigidity": {"p": [0.80, 0.90, 0.95, 0.98], "q": [1.0], "L": [8], "M": None,
                 "burn_in": 500, "interval": 5, "n_samples": 2000},
    "displacement": {"p": [0.95], "q": [1.0], "L": [8], "M": None,
                     "burn_in": 500, "interval": 5, "n_samples": 20000, "d_max": 4,
                     "pool_radius": 5},
    "wall-stats": {"p": [0.90, 0.95, 0.98], "q": [1.0], "L": [8], "M": None,
                   "burn_in": 500, "interval": 5, "n_samples": 1500, "k_max": 400,
                   "pool_radius": 5},
}


@dataclass
class ResultRow:
    kind: str
    p: float
    q: float
    L: int
    M: int
    estimator: str
    value: float
    stderr: float
    n_samples: int
    n_eff: float

    def key(self):
        return (self.p, self.q, self.L, self.M, self.estimator)

    def cells(self):
        f = lambda x: format(float(x), ".17g")
        return [self.kind, f(self.p), f(self.q), str(self.L), str(self.M), self.estimator,
                f(self.value), f(self.stderr), str(self.n_samples), f(self.n_eff)]


@dataclass
class ExperimentSpec:
    kind: str
    settings: dict = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def from_config(cls, kind, config=None, seed=0) -> "ExperimentSpec":
        if kind not in KINDS:
            raise ValueError(f"unknown experiment {kind!r}")
        s = copy.deepcopy(DEFAULTS[kind])
        unknown = set(config or {}) - set(s)
        if unknown:
            raise ValueError(f"unknown settings {sorted(unknown)}")
        s.update(config or {})
        spec = cls(kind, s, int(seed))
        spec.validate()
        return spec

    def points(self) -> list[tuple]:
        s = self.settings
        out = []
        for L in s["L"]:
            Ms = s["M"] if s["M"] is not None else [L, 2 * L]
            for M in Ms:
                for p in s["p"]:
                    for q in s["q"]:
                        out.append((float(p), float(q), int(L), int(M)))
        return sorted(out)

    def validate(self):
        for p, q, L, M in self.points():
            if L < 1 or M < L:
                raise ValueError(f"need L >= 1 and M >= L, got L={L}, M={M}")
            if q < 1:
                raise ValueError("experiments need q >= 1")
            if not 0 < p < 1:
                raise ValueError("p must lie in (0, 1)")


def integrated_time(x, c=5.0) -> float:
    """Integrated autocorrelation time with Sokal's self-consistent window."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2:
        return 0.5
    y = x - x.mean()
    var = np.dot(y, y) / n
    if var == 0:
        return 0.5
    f = np.fft.rfft(y, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n] / (n * var)
    tau = 0.5
    for w in range(1, n):
        tau += acf[w]
        if w >= c * tau:
            break
    return max(tau, 0.5)


def mean_and_error(x):
    x = np.asarray(x, dtype=float)
    n = len(x)
    tau = integrated_time(x)
    n_eff = n / (2 * tau)
    se = x.std(ddof=1) / np.sqrt(n_eff) if n > 1 else float("nan")
    return float(x.mean()), float(se), n, float(n_eff)


def log_linear_fit(ks, probs, errs):
    """Weighted least-squares slope of log(prob) against k, with its standard error."""
    ks = np.asarray(ks, float)
    y = np.log(probs)
    sy = np.asarray(errs, float) / np.asarray(probs, float)
    sy = np.where(sy > 0, sy, np.min(sy[sy > 0]) if np.any(sy > 0) else 1.0)
    w = 1 / sy ** 2
    X = np.stack([np.ones_like(ks), ks], axis=1)
    A = X.T @ (w[:, None] * X)
    beta = np.linalg.solve(A, X.T @ (w * y))
    cov = np.linalg.inv(A)
    return float(beta[1]), float(np.sqrt(cov[1, 1]))


def _pool_cells(radius):
    return [(x, y) for x in range(-radius, radius + 1) for y in range(-radius, radius + 1)]


def measure_rigidity(omega, settings):
    box = omega.box
    L = box.L
    lab = omega.labels()
    x0 = box.vertex_id((0, 0, 0))
    x1 = box.vertex_id((0, 0, 1))
    d = extract_interface(omega)
    cl = classify(d, include=[(L + 1, L + 1), (-L - 1, -L - 1)])
    return {
        "P(x<->lower)": float(lab[x0] == lab[box.BOTTOM]),
        "P(x+e3<->upper)": float(lab[x1] == lab[box.TOP]),
        "P(h<->inf)": float(h_to_infinity(d, (0, 0), L, cl)),
        "P(c-plaquette)": float((0, 0, 0, 2) in cl.c),
    }


def measure_displacement(omega, settings):
    d = extract_interface(omega)
    out = {}
    D0 = displacement((0, 0), d)
    cells = _pool_cells(min(settings["pool_radius"], omega.box.L))
    Ds = np.array([displacement(c, d) for c in cells])
    for k in range(1, settings["d_max"] + 1):
        out[f"P(D>={k})"] = float(D0 >= k)
        out[f"P(D>={k}) pooled"] = float(np.mean(Ds >= k))
    return out


def rim_cells(S) -> set:
    """Cells of pi(S) that are 4-adjacent to a cell outside pi(S)."""
    return {c for c in S.pi if any((c[0] + d[0], c[1] + d[1]) not in S.pi for d in N4)}


def origin_map(groups) -> dict:
    """Cell h -> the group whose origin is h under the ordering relative to h.

    Ordering cells by distance to h puts h first whenever it qualifies as a
    wall origin, so a group has origin h exactly when h is a rim cell of one
    of its walls.  Projections of distinct walls are disjoint, so the map is
    well defined.
    """
    out = {}
    for g in groups.values():
        for S in g.walls:
            for c in rim_cells(S):
                out[c] = g
    return out


def measure_wall_stats(omega, settings):
    d = extract_interface(omega)
    at = origin_map(group(decompose(d)))
    cells = _pool_cells(min(settings["pool_radius"], omega.box.L))
    k_max = settings["k_max"]
    hist = np.zeros(k_max + 2)
    for c in cells:
        g = at.get(c)
        k = g.Pi if g is not None else 0
        hist[min(k, k_max + 1)] += 1
    hist /= len(cells)
    out = {f"P(Pi={k})": float(hist[k]) for k in range(k_max + 1)}
    out[f"P(Pi>{k_max})"] = float(hist[k_max + 1])
    out["P(Pi_origin=0)"] = float((0, 0) not in at)
    return out


MEASURES = {"rigidity": measure_rigidity, "displacement": measure_displacement,
            "wall-stats": measure_wall_stats}


def run_point(kind, settings, point, seed):
    p, q, L, M = point
    cfg = SamplerConfig(L, M, p, q, seed, settings["burn_in"], settings["interval"],
                        settings["n_samples"])
    series = {}
    for _, omega in sample(cfg):
        for name, v in MEASURES[kind](omega, settings).items():
            series.setdefault(name, []).append(v)
    rows = []
    stats = {}
    for name, xs in series.items():
        m, se, n, ne = mean_and_error(xs)
        stats[name] = (m, se, n, ne)
        if kind == "wall-stats" and name.startswith("P(Pi=") and m == 0:
            continue
        if ne >= MIN_EFF:
            rows.append(ResultRow(kind, p, q, L, M, name, m, se, n, ne))
        else:
            log.warning("%s at %s: only %.1f effective samples, row dropped", name, point, ne)
    rows += _fit_rows(kind, p, q, L, M, stats)
    return rows


def _fit_rows(kind, p, q, L, M, stats):
    if kind == "displacement":
        suffixes = ("", " pooled")
        prefix, ks_all = "P(D>={})", range(1, 10 ** 6)
    elif kind == "wall-stats":
        suffixes = ("",)
        prefix, ks_all = "P(Pi={})", range(0, 10 ** 6)
    else:
        return []
    rows = []
    for suf in suffixes:
        ks, ps, es, ne, n = [], [], [], [], 0
        for k in ks_all:
            name = prefix.format(k) + suf
            if name not in stats:
                break
            m, se, n, eff = stats[name]
            if m > 0 and se > 0 and eff >= MIN_EFF:
                ks.append(k)
                ps.append(m)
                es.append(se)
                ne.append(eff)
        if len(ks) < 2:
            log.warning("%s%s: fewer than two tail points with mass, no fit", kind, suf)
            continue
        slope, se = log_linear_fit(ks, ps, es)
        base = "log_tail_slope" if kind == "displacement" else "log_freq_slope"
        rows.append(ResultRow(kind, p, q, L, M, base + suf, slope, se, n, min(ne)))
        if kind == "displacement":
            rows.append(ResultRow(kind, p, q, L, M, "decay_rate" + suf, -slope, se, n, min(ne)))
    return rows


def point_seeds(seed, n):
    ss = np.random.SeedSequence(int(seed))
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in ss.spawn(n)]


def run_experiment(spec: ExperimentSpec, workers=None) -> list[ResultRow]:
    points = spec.points()
    seeds = point_seeds(spec.seed, len(points))
    workers = workers or int(os.environ.get(THREADS_ENV, "1"))
    args = [(spec.kind, spec.settings, pt, s) for pt, s in zip(points, seeds)]
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(run_point, *zip(*args)))
    else:
        parts = [run_point(*a) for a in args]
    rows = [r for part in parts for r in part]
    return sorted(rows, key=ResultRow.key)


def run_rigidity(spec):
    return run_experiment(spec)


def run_displacement(spec):
    return run_experiment(spec)


def run_wall_stats(spec):
    return run_experiment(spec)


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def read_csv(text) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def load_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
