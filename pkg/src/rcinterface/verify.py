"""Verification suites run by ``rcinterface verify``.

Every suite returns a :class:`SuiteResult` whose ``failures`` name the
failing instance.  Defaults are sized to finish in a few minutes; the
acceptance tests call the same functions with their full settings.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import exact, exhaustive
from .interface import (Interface, NotInI, bump, check_properties, classify, decompose,
                        extract_interface, reconstruct)
from .lattice import Box
from .mc import ChainState, SamplerConfig, flat_start, sample

log = logging.getLogger(__name__)


@dataclass
class SuiteResult:
    name: str
    failures: list = field(default_factory=list)
    checked: int = 0
    seconds: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        s = f"{status} {self.name}: {self.checked} checks, {len(self.failures)} failures ({self.seconds:.1f}s)"
        for f in self.failures[:10]:
            s += f"\n    {f}"
        return s


# ------------------------------------------------------------ random models

def random_model(rng, m, p, q, max_nodes=6) -> exact.FiniteModel:
    """Random multigraph with ``m`` free edges and a random boundary wiring."""
    n = int(rng.integers(2, max_nodes + 1))
    edges = [tuple(int(x) for x in rng.integers(0, n, 2)) for _ in range(m)]
    wiring = []
    if n >= 3 and rng.random() < 0.5:
        k = int(rng.integers(2, n))
        wiring.append(sorted(int(x) for x in rng.choice(n, k, replace=False)))
    return exact.FiniteModel(n, edges, wiring, {}, p, q)


def suite_log_partition(n_models=20, seed=1, max_edges=12) -> SuiteResult:
    """Log-partition identity and g bounds on random models."""
    res = SuiteResult("log-partition")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_models):
        m = int(rng.integers(1, max_edges + 1))
        base = random_model(rng, m, 0.5, 1.0)
        for p in (0.3, 0.7, 0.95):
            for q in (1.0, 1.5, 2.0, 4.0, 0.5):
                model = base.with_params(p, q)
                en = exact._enum(model)
                g = exact.g_all(model, en)
                res.checked += 1
                # the linear bound only holds for q >= 1; below 1 check the sharp interval
                ok = exact.g_bounds_hold(g, p, q) if q >= 1 else exact.g_interval_holds(g, p, q)
                if not (ok and exact.g_interval_holds(g, p, q)):
                    res.failures.append(f"model {i} (m={m}) p={p} q={q}: g outside bounds {g}")
                if q == 0.5:
                    continue
                r = exact.verify_log_partition(model)
                worst = max(worst, r)
                res.checked += 1
                if not r <= 1e-8:
                    res.failures.append(f"model {i} (m={m}) p={p} q={q}: residual {r:.3g}")
    res.info["max_residual"] = worst
    return res


def comparison_pairs(p, q, dq=0.5, dp=0.1):
    """One instance of each comparison inequality around (p, q).

    Returns ((p1, q1), (p2, q2)) pairs with phi(p1, q1) below phi(p2, q2).
    """
    q2 = max(q + dq, 1.0)
    first = ((max(p - dp, 0.01), q2), (p, q))
    # p'/(q'(1-p')) = 1.2 * p/(q(1-p))
    t = 1.2 * p / (q * (1 - p)) * q2
    second = ((p, q), (t / (1 + t), q2))
    return [first, second]


def suite_dominance(n_models=10, seed=2, max_edges=8,
                    grid=((0.3, 1.0), (0.5, 1.5), (0.7, 2.0), (0.9, 4.0))) -> SuiteResult:
    """Monotone-coupling certificates for both comparison inequalities."""
    res = SuiteResult("dominance")
    rng = np.random.default_rng(seed)
    for i in range(n_models):
        m = int(rng.integers(1, max_edges + 1))
        base = random_model(rng, m, 0.5, 1.0)
        for p, q in grid:
            for kind, ((p1, q1), (p2, q2)) in zip(("first", "second"), comparison_pairs(p, q)):
                lo, hi = base.with_params(p1, q1), base.with_params(p2, q2)
                res.checked += 1
                if not exact.check_dominance(lo, hi):
                    res.failures.append(f"model {i} (m={m}) {kind}: ({p1:.4g},{q1}) vs ({p2:.4g},{q2})")
    return res


def suite_splitting_sets(max_size=6, side=5) -> SuiteResult:
    res = SuiteResult("splitting-sets")
    counts, fails = exhaustive.verify_splitting_sets(max_size, side)
    res.checked = int(np.sum(counts))
    for k, f in enumerate(fails):
        if f:
            res.failures.append(f"{int(f)} vertex sets of size {k} violate the splitting-set property")
    res.info["counts"] = [int(c) for c in counts]
    return res


def suite_boundary_graphs(max_size=6, side=4, flood_upto=6) -> SuiteResult:
    res = SuiteResult("boundary-graphs")
    counts, fails, cav, mism = exhaustive.verify_boundary_graphs(max_size, side, flood_upto)
    res.checked = int(np.sum(counts))
    for k in range(len(counts)):
        if fails[k]:
            res.failures.append(f"{int(fails[k])} plaquette sets of size {k} with disconnected boundary graph")
        if mism[k]:
            res.failures.append(f"{int(mism[k])} plaquette sets of size {k}: fast path disagrees with flood")
    res.info["counts"] = [int(c) for c in counts]
    res.info["cavities"] = [int(c) for c in cav]
    return res


def toy_interfaces():
    """Flat interface and a one-cell bump on the single-column box."""
    return {"flat": Interface.regular(), "bump": bump((0, 0))}


def suite_interface_identity(params=((0.7, 2.0), (0.5, 1.0), (0.9, 3.5))) -> SuiteResult:
    res = SuiteResult("interface-identity")
    box = Box(0, 1)
    for name, delta in toy_interfaces().items():
        for p, q in params:
            lhs, rhs = exact.interface_probability_check(box, delta, p, q)
            rel = abs(lhs - rhs) / rhs
            res.checked += 1
            if not rel <= 1e-10:
                res.failures.append(f"{name} p={p} q={q}: relative error {rel:.3g}")
            r = exact.f_sum_residual(box, delta, p, q)
            res.checked += 1
            if not r <= 1e-8:
                res.failures.append(f"{name} p={p} q={q}: f-sum residual {r:.3g}")
    return res


# ---------------------------------------------------------------- MC vs exact

TV_PARAMS = (0.95, 2.0)


def exact_toy_table(p, q, box=None):
    box = box or Box(0, 1)
    model = exact.dobrushin_model(box, p, q)
    return exact.measure(model, conditioned=True).probs


def tv_curve(checkpoints=(10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6), p=TV_PARAMS[0], q=TV_PARAMS[1],
             seed=11, burn_in=100):
    """TV distance between the chain's empirical law and the exact table at each checkpoint."""
    box = Box(0, 1)
    pi = exact_toy_table(p, q, box)
    st = ChainState(box, p, q, seed, flat_start(box))
    st.run(burn_in)
    counts = np.zeros(len(pi))
    out = []
    done = 0
    for c in checkpoints:
        codes = st.run(c - done, record=True)
        counts += np.bincount(codes, minlength=len(pi))
        done = c
        out.append((c, 0.5 * float(np.abs(counts / done - pi).sum())))
    return out


def suite_mc_tv(checkpoints=(10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6), tol=0.01) -> SuiteResult:
    res = SuiteResult("mc-tv")
    curve = tv_curve(checkpoints)
    res.info["curve"] = curve
    res.checked = len(curve)
    tvs = [t for _, t in curve]
    if tvs[-1] > tol:
        res.failures.append(f"TV {tvs[-1]:.4g} > {tol} after {curve[-1][0]} sweeps")
    for (a, ta), (b, tb) in zip(curve, curve[1:]):
        if not tb < ta:
            res.failures.append(f"TV did not decrease from {a} ({ta:.4g}) to {b} sweeps ({tb:.4g})")
    return res


# -------------------------------------------------------------- bijection

def corrupt(delta: Interface, rng) -> Interface:
    """Flip one plaquette of a stored interface: drop an extra one or add a missing cell."""
    extra = sorted(delta.extra)
    if extra:
        h = extra[int(rng.integers(len(extra)))]
        return Interface(delta.extra - {h}, delta.missing)
    return Interface(frozenset({(0, 0, 1, 2)}), delta.missing)


def bijection_check(delta: Interface, stored: Interface | None = None) -> list[str]:
    """Round trip and wall properties for one interface; ``stored`` replaces it in the comparison."""
    out = []
    cl = classify(delta)
    out += [f"properties: {f}" for f in check_properties(delta, cl)]
    fam = decompose(delta)
    for S in fam.walls.values():
        out += [f"wall at {S.origin}: {f}" for f in S.inequalities()]
    try:
        back = reconstruct(fam)
    except Exception as exc:  # noqa: BLE001 - any failure is a reportable check failure
        return out + [f"reconstruct raised {exc!r}"]
    if back != (stored if stored is not None else delta):
        out.append("reconstruct(decompose(delta)) != delta")
    return out


def suite_bijection(n_samples=600, L=5, M=5, qs=(1.0, 2.0), ps=(0.85, 0.90, 0.95), seed=3,
                    interval=5, burn_in=200, inject_fault=False) -> SuiteResult:
    res = SuiteResult("bijection")
    rng = np.random.default_rng(seed)
    per = max(1, -(-n_samples // (len(qs) * len(ps))))
    seeds = np.random.SeedSequence(seed).spawn(len(qs) * len(ps))
    injected = False
    for (q, p), ss in zip([(q, p) for q in qs for p in ps], seeds):
        cfg = SamplerConfig(L, M, p, q, int(ss.generate_state(1)[0]), burn_in, interval, per)
        for sweep, omega in sample(cfg):
            try:
                delta = extract_interface(omega)
            except NotInI:
                res.failures.append(f"p={p} q={q} sweep {sweep}: chain left I")
                continue
            stored = None
            if inject_fault and not injected and delta.extra:
                stored = corrupt(delta, rng)
                injected = True
            res.checked += 1
            for f in bijection_check(delta, stored):
                res.failures.append(f"p={p} q={q} sweep {sweep}: {f}")
    return res


# ------------------------------------------------------------------ driver

SUITES = {
    "splitting-sets": suite_splitting_sets,
    "boundary-graphs": suite_boundary_graphs,
    "log-partition": suite_log_partition,
    "dominance": suite_dominance,
    "interface-identity": suite_interface_identity,
    "mc-tv": suite_mc_tv,
    "bijection": suite_bijection,
}


def run_verify(only=None, inject_fault=False, printer=print) -> list[SuiteResult]:
    names = list(SUITES) if not only else list(only)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}; choose from {list(SUITES)}")
    if inject_fault and "bijection" not in names:
        names.append("bijection")
    results = []
    for n in names:
        t = time.time()
        kw = {"inject_fault": True} if (n == "bijection" and inject_fault) else {}
        r = SUITES[n](**kw)
        r.seconds = time.time() - t
        printer(r.line())
        results.append(r)
    return results
