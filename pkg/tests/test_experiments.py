import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rcinterface import experiments as ex
from rcinterface.cli import main


def ar1(phi, n, seed):
    r = np.random.default_rng(seed)
    x = np.empty(n)
    x[0] = r.normal()
    for i in range(1, n):
        x[i] = phi * x[i - 1] + r.normal()
    return x


def test_integrated_time_iid_and_ar1():
    assert ex.integrated_time(np.random.default_rng(0).normal(size=20000)) == pytest.approx(0.5, abs=0.05)
    phi = 0.8
    tau = (1 + phi) / (2 * (1 - phi))
    assert ex.integrated_time(ar1(phi, 100000, 1)) == pytest.approx(tau, rel=0.15)
    assert ex.integrated_time(np.ones(50)) == 0.5


def test_mean_and_error_iid():
    x = np.random.default_rng(3).random(40000)
    m, se, n, ne = ex.mean_and_error(x)
    assert n == 40000 and ne == pytest.approx(n, rel=0.15)
    assert se == pytest.approx(x.std(ddof=1) / np.sqrt(ne))
    assert abs(m - 0.5) < 4 * se


@given(st.floats(-2, -0.05), st.floats(-3, 0))
def test_log_linear_fit_exact(slope, c):
    ks = np.arange(1, 6)
    ps = np.exp(c + slope * ks)
    s, se = ex.log_linear_fit(ks, ps, 0.01 * ps)
    assert s == pytest.approx(slope, abs=1e-9)
    assert se > 0


def test_spec_validation():
    spec = ex.ExperimentSpec.from_config("rigidity", {"L": [2], "p": [0.9], "M": None})
    assert spec.points() == [(0.9, 1.0, 2, 2), (0.9, 1.0, 2, 4)]
    with pytest.raises(ValueError):
        ex.ExperimentSpec.from_config("rigidity", {"L": [2], "M": [1]})
    with pytest.raises(ValueError):
        ex.ExperimentSpec.from_config("rigidity", {"q": [0.5]})
    with pytest.raises(ValueError):
        ex.ExperimentSpec.from_config("rigidity", {"L": [0]})
    with pytest.raises(ValueError):
        ex.ExperimentSpec.from_config("rigidity", {"bogus": 1})
    with pytest.raises(ValueError):
        ex.ExperimentSpec.from_config("nothing")


SMALL = {"L": [1], "M": [1], "p": [0.9], "burn_in": 20, "interval": 1, "n_samples": 400}


def test_rows_deterministic_and_sorted():
    spec = ex.ExperimentSpec.from_config("rigidity", SMALL, seed=5)
    a = ex.to_csv(ex.run_rigidity(spec))
    b = ex.to_csv(ex.run_rigidity(spec))
    assert a == b
    rows = ex.read_csv(a)
    assert list(rows[0]) == list(ex.COLUMNS)
    names = [r["estimator"] for r in rows]
    assert names == sorted(names)
    for r in rows:
        assert float(r["n_eff"]) >= ex.MIN_EFF
        assert int(r["n_samples"]) == 400


def test_rigidity_logical_chain():
    rows = {r.estimator: r for r in ex.run_rigidity(ex.ExperimentSpec.from_config("rigidity", SMALL, seed=2))}
    h, c = rows.get("P(h<->inf)"), rows.get("P(c-plaquette)")
    if h and c:
        assert h.value <= c.value + 2 * np.hypot(h.stderr, c.stderr)
    lo = rows.get("P(x<->lower)")
    if lo and c:
        assert lo.value >= c.value - 2 * np.hypot(lo.stderr, c.stderr)


def test_low_effective_samples_dropped(caplog):
    cfg = dict(SMALL, n_samples=50)
    rows = ex.run_rigidity(ex.ExperimentSpec.from_config("rigidity", cfg, seed=1))
    assert rows == []
    assert "effective samples" in caplog.text


def test_displacement_tail_monotone():
    cfg = dict(SMALL, p=[0.85], n_samples=600, d_max=3, pool_radius=1)
    rows = ex.run_displacement(ex.ExperimentSpec.from_config("displacement", cfg, seed=4))
    by = {r.estimator: r.value for r in rows}
    pooled = [by.get(f"P(D>={k}) pooled") for k in (1, 2, 3)]
    pooled = [v for v in pooled if v is not None]
    assert all(b <= a for a, b in zip(pooled, pooled[1:]))


def test_wall_stats_histogram_normalised():
    from rcinterface.interface import bump, omega_bar
    from rcinterface.lattice import Box

    om = omega_bar(Box(3, 3), bump((0, 0)))
    out = ex.measure_wall_stats(om, {"k_max": 6, "pool_radius": 3})
    hist = [out[f"P(Pi={k})"] for k in range(7)]
    assert sum(hist) == pytest.approx(1.0)
    # the bump wall has Pi = 4; its four outer projection cells are rim cells
    assert hist[4] == pytest.approx(4 / 49)
    assert hist[0] == pytest.approx(45 / 49)
    # the centre cell is interior to the projection, so no group has origin there
    assert out["P(Pi_origin=0)"] == 1.0
    assert ex.rim_cells(next(iter(ex.decompose(bump((0, 0))).walls.values()))) == \
        {(1, 0), (-1, 0), (0, 1), (0, -1)}


def test_point_seeds_distinct():
    s = ex.point_seeds(7, 5)
    assert len(set(s)) == 5 and s == ex.point_seeds(7, 5)


def test_csv_float_format():
    row = ex.ResultRow("rigidity", 0.1, 1.0, 2, 2, "x", 1 / 3, 0.01, 10, 5.0)
    assert row.cells()[6] == format(1 / 3, ".17g")


# ---------------------------------------------------------------------- CLI

def test_cli_show_config(capsys):
    assert main(["experiment", "displacement", "--show-config"]) == 0
    assert json.loads(capsys.readouterr().out) == ex.DEFAULTS["displacement"]


def test_cli_experiment_bytes_repeat(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(SMALL))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["experiment", "rigidity", "--config", str(cfg), "--out", str(a), "--seed", "9"]) == 0
    assert main(["experiment", "rigidity", "--config", str(cfg), "--out", str(b), "--seed", "9"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_bad_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"q": [0.5]}))
    assert main(["experiment", "rigidity", "--config", str(cfg)]) == 2


def test_cli_sample_and_analyze(tmp_path, capsys):
    ck, dump = tmp_path / "c.bin", tmp_path / "d.json"
    assert main(["sample", "--L", "2", "--p", "0.9", "--q", "2", "--sweeps", "60",
                 "--checkpoint", str(ck), "--checkpoint-every", "20", "--dump", str(dump)]) == 0
    first = json.loads(capsys.readouterr().out)
    assert first["sweep"] == 60
    assert main(["sample", "--resume", "--checkpoint", str(ck), "--sweeps", "10"]) == 0
    assert json.loads(capsys.readouterr().out)["sweep"] == 70
    assert main(["analyze-interface", str(dump)]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["round_trip"] and info["property_failures"] == []
    assert main(["sample", "--resume"]) == 2


def test_cli_verify_only(capsys):
    assert main(["verify", "--only", "interface-identity"]) == 0
    out = capsys.readouterr().out
    assert "PASS interface-identity" in out and "log-partition" not in out


def test_cli_inject_fault(capsys, monkeypatch):
    from rcinterface import verify
    monkeypatch.setitem(verify.SUITES, "bijection",
                        lambda inject_fault=False: verify.suite_bijection(
                            n_samples=6, L=3, M=3, burn_in=30, inject_fault=inject_fault))
    assert main(["verify", "--only", "bijection"]) == 0
    assert main(["verify", "--only", "bijection", "--inject-fault"]) == 1
    out = capsys.readouterr().out
    assert "FAIL bijection" in out and "reconstruct(decompose(delta)) != delta" in out
