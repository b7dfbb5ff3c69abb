import csv
import json
import pathlib

import numpy as np
import pytest

from exchopt.cli import main

SCHEMA_DIR = (pathlib.Path(__file__).resolve().parents[1]
              / "src" / "exchopt" / "schemas")


def run(args):
    return main(args)


def degenerate_config(tmp_path):
    cfg = {"vol": {"c": [1.0, 1.0], "v_level": [0.5, 0.5], "xi": [0.0, 0.0],
                   "rho_v": 0.0},
           "corr": {"gamma": 0.8, "level": 0.6, "alpha": 0.0},
           "market": {"s0": [100, 100], "v0": [0.5, 0.5], "rho0": 0.6,
                      "rate": 0.04, "maturity": 1.0}}
    p = tmp_path / "deg.json"
    p.write_text(json.dumps(cfg))
    return p


def validate_schema(payload, name):
    import jsonschema
    schema = json.loads((SCHEMA_DIR / name).read_text())
    jsonschema.validate(payload, schema)


def test_price_taylor_writes_report(tmp_path):
    out = tmp_path / "o"
    assert run(["price", "--method", "taylor", "--out", str(out)]) == 0
    rep = json.loads((out / "price_report.json").read_text())
    validate_schema(rep, "price_report.v1.json")
    man = json.loads((out / "manifest_price.json").read_text())
    validate_schema(man, "manifest.v1.json")
    assert str(out / "price_report.json") in man["outputs"]
    assert rep["breakdown"]["total"] == rep["price"]


def test_price_degenerate_taylor_equals_margrabe_const(tmp_path):
    cfgp = degenerate_config(tmp_path)
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert run(["price", "--config", str(cfgp), "--method", "taylor",
                "--out", str(a)]) == 0
    assert run(["price", "--config", str(cfgp), "--method", "margrabe-const",
                "--out", str(b)]) == 0
    pa = json.loads((a / "price_report.json").read_text())
    pb = json.loads((b / "price_report.json").read_text())
    assert pa["price"] == pb["price"]


def test_price_mc_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    args = ["price", "--method", "mc", "--paths", "5000", "--steps", "100",
            "--seed", "7"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert (a / "price_report.json").read_bytes() == \
        (b / "price_report.json").read_bytes()


def test_price_paper_mode_divergence_note(tmp_path):
    out = tmp_path / "o"
    assert run(["price", "--method", "taylor", "--discount-mode", "paper-eq9",
                "--out", str(out)]) == 0
    rep = json.loads((out / "price_report.json").read_text())
    assert "divergence_note" in rep
    validate_schema(rep, "price_report.v1.json")


def test_price_invalid_config_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"market": {"rho0": 5.0}}))
    assert run(["price", "--config", str(bad)]) == 2


def test_sweep_corr_monotone_taylor(tmp_path):
    out = tmp_path / "o"
    assert run(["sweep", "--vary", "corr", "--grid=-0.9:0.9:10",
                "--method", "taylor", "--out", str(out)]) == 0
    with open(out / "sweep_corr.csv") as fh:
        rows = list(csv.DictReader(fh))
    prices = [float(r["price"]) for r in rows]
    assert len(prices) == 10
    assert all(b <= a + 1e-9 for a, b in zip(prices, prices[1:]))


def test_sweep_corr_monotone_mc(tmp_path):
    out = tmp_path / "o"
    assert run(["sweep", "--vary", "corr", "--grid=-0.9:0.9:6",
                "--method", "mc", "--paths", "20000", "--steps", "200",
                "--seed", "3", "--out", str(out)]) == 0
    with open(out / "sweep_corr.csv") as fh:
        rows = list(csv.DictReader(fh))
    prices = [float(r["price"]) for r in rows]
    ses = [float(r["std_error"]) for r in rows]
    for a, b, sa, sb in zip(prices, prices[1:], ses, ses[1:]):
        assert b <= a + (sa + sb)


def test_sweep_single_point_matches_price(tmp_path):
    out = tmp_path / "o"
    assert run(["sweep", "--vary", "vol", "--grid", "0.3:0.3:1",
                "--method", "taylor", "--out", str(out)]) == 0
    with open(out / "sweep_vol.csv") as fh:
        rows = list(csv.DictReader(fh))
    out2 = tmp_path / "p"
    assert run(["price", "--method", "taylor", "--out", str(out2)]) == 0
    rep = json.loads((out2 / "price_report.json").read_text())
    assert float(rows[0]["price"]) == pytest.approx(rep["price"], rel=1e-12)


def test_sweep_bad_grid(tmp_path):
    assert run(["sweep", "--vary", "vol", "--grid", "2:1:5",
                "--out", str(tmp_path)]) == 2
    assert run(["sweep", "--vary", "vol", "--grid", "nope",
                "--out", str(tmp_path)]) == 2


def test_simulate_writes_three_csvs(tmp_path):
    out = tmp_path / "o"
    assert run(["simulate", "--paths", "1", "--steps", "250", "--seed", "11",
                "--out", str(out)]) == 0
    for name in ("prices.csv", "squared_vols.csv", "correlation.csv"):
        assert (out / name).exists()
    with open(out / "correlation.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["time", "rho"]
    assert len(rows) == 252
    man = json.loads((out / "manifest_simulate.json").read_text())
    validate_schema(man, "manifest.v1.json")


def test_simulate_zero_paths_usage_error(tmp_path):
    assert run(["simulate", "--paths", "0", "--out", str(tmp_path)]) == 2


def test_simulate_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    args = ["simulate", "--paths", "2", "--steps", "100", "--seed", "5"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    for n in ("prices_p0.csv", "squared_vols_p1.csv", "correlation_p0.csv"):
        assert (a / n).read_bytes() == (b / n).read_bytes()


def test_moments_compare_table(tmp_path):
    out = tmp_path / "o"
    assert run(["moments", "--compare", "--paths", "20000", "--steps", "100",
                "--seed", "2", "--out", str(out)]) == 0
    payload = json.loads((out / "moment_summary.json").read_text())
    validate_schema(payload, "moment_summary.v1.json")
    with open(out / "moment_comparison.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 7
    by = {r["statistic"]: r for r in rows}
    for r in rows:
        assert float(r["rel_gap_cf_ode"]) < 1e-8
        assert abs(float(r["z_cf_mc"])) < 4.5
    # printed-coefficient column diverges where the printed algebra is wrong
    assert float(by["var_rho_plus"]["rel_gap_verbatim_cf"]) > 1e-3
    assert by["cov12"]["rel_gap_verbatim_cf"] == "inf"


def test_moments_deterministic_config(tmp_path):
    cfgp = degenerate_config(tmp_path)
    out = tmp_path / "o"
    assert run(["moments", "--config", str(cfgp), "--out", str(out)]) == 0
    payload = json.loads((out / "moment_summary.json").read_text())
    assert payload["var"] == [0.0, 0.0, 0.0]
    assert payload["cov12"] == 0.0


def test_analyze_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    n = 120
    dates = np.datetime64("2018-01-01") + np.arange(n)
    p1 = 50 * np.exp(np.cumsum(0.01 * rng.standard_normal(n)))
    p2 = 55 * np.exp(np.cumsum(0.01 * rng.standard_normal(n)))
    src = tmp_path / "prices.csv"
    src.write_text("date,price1,price2\n" + "\n".join(
        f"{d},{a:.6f},{b:.6f}" for d, a, b in zip(dates, p1, p2)) + "\n")
    out = tmp_path / "o"
    assert run(["analyze", str(src), "--window", "50", "--out", str(out)]) == 0
    summ = json.loads((out / "summary.json").read_text())
    validate_schema(summ, "summary.v1.json")
    with open(out / "rolling_corr_prices.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == n - 50 + 1
    # affine transform of one column leaves correlations unchanged
    src2 = tmp_path / "prices2.csv"
    src2.write_text("date,price1,price2\n" + "\n".join(
        f"{d},{a:.6f},{3 * b + 7:.6f}" for d, a, b in zip(dates, p1, p2)) + "\n")
    out2 = tmp_path / "o2"
    assert run(["analyze", str(src2), "--window", "50", "--out", str(out2)]) == 0
    with open(out2 / "rolling_corr_prices.csv") as fh:
        rows2 = list(csv.DictReader(fh))
    a = np.array([float(r["corr"]) for r in rows])
    b = np.array([float(r["corr"]) for r in rows2])
    assert np.allclose(a, b, atol=5e-6)


def test_analyze_window_too_long(tmp_path):
    src = tmp_path / "p.csv"
    src.write_text("date,price1,price2\n2020-01-01,1,2\n2020-01-02,2,3\n")
    assert run(["analyze", str(src), "--window", "50",
                "--out", str(tmp_path)]) == 2
