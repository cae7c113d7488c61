"""End-to-end checks of the command line tool, run as subprocesses."""
from __future__ import annotations

import json

import numpy as np
import pytest

from climdamage import (
    GdpTrajectory,
    GlobalSeries,
    save_gdp,
    save_global_series,
    save_grid,
)

from conftest import make_field, run_cli

GOLDEN_PV = ("--none", "0", "--tvar", "245.31",
             "--svar", "34647.70", "--stvar", "47521.66")


def write_series(path, values, start=2020):
    values = np.asarray(values, dtype=np.float64)
    years = np.arange(start, start + values.shape[0])
    freq = "monthly" if values.ndim == 2 else "annual"
    save_global_series(GlobalSeries(years, values, freq), path)


def write_gdp(path, regions=("GLOBAL",), value=100.0):
    years = np.arange(2020, 2101)
    save_gdp(
        {r: GdpTrajectory(r, years, np.full(years.size, value)) for r in regions},
        path,
    )


def write_anomaly_grid(path, seed=7, ny=12, start=2000):
    rng = np.random.default_rng(seed)
    values = rng.normal(1.0, 0.5, size=(ny, 12, 3, 4))
    save_grid(make_field(values, years=np.arange(start, start + ny)), path)


def read_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, ln.split(","))) for ln in lines[1:]]


def test_constant_warming_reproduces_calibration_loss(tmp_path):
    write_series(tmp_path / "s.csv", np.full(3, 2.5))
    r = run_cli(["moments", "--variant", "none", "--series", "s.csv",
                 "--per-year", "--out", "m.csv"], tmp_path)
    assert r.returncode == 0, r.stderr
    r = run_cli(["damages", "--moments", "m.csv", "--out", "d.csv"], tmp_path)
    assert r.returncode == 0, r.stderr
    rows = read_rows(tmp_path / "d.csv")
    assert len(rows) == 3
    for row in rows:
        assert float(row["loss_fraction"]) == pytest.approx(0.0201, rel=1e-9)


def test_decompose_golden_percentages(tmp_path):
    r = run_cli(["decompose", *GOLDEN_PV, "--out", "split.csv"], tmp_path)
    assert r.returncode == 0, r.stderr
    row, = read_rows(tmp_path / "split.csv")
    assert float(row["spatial_pct"]) == pytest.approx(72.91, abs=0.01)
    assert float(row["temporal_pct"]) == pytest.approx(0.52, abs=0.01)
    assert float(row["interaction_pct"]) == pytest.approx(26.57, abs=0.01)


def test_moments_to_pv_pipeline(tmp_path):
    write_series(tmp_path / "s.csv", np.linspace(1.0, 2.0, 11))
    write_gdp(tmp_path / "gdp.csv")
    for cmd in (
        ["moments", "--variant", "none", "--series", "s.csv", "--per-year",
         "--out", "m.csv"],
        ["damages", "--moments", "m.csv", "--out", "d.csv"],
        ["pv", "--losses", "d.csv", "--gdp", "gdp.csv", "--rate", "0.04",
         "--window", "2020", "2030", "--out", "pv.csv"],
    ):
        r = run_cli(cmd, tmp_path)
        assert r.returncode == 0, r.stderr
    rows = read_rows(tmp_path / "pv.csv")
    total = [r for r in rows if r["year"] == "TOTAL"]
    contributions = [float(r["pv_contribution"]) for r in rows if r["year"] != "TOTAL"]
    assert len(total) == 1 and len(contributions) == 11
    assert float(total[0]["pv_contribution"]) == pytest.approx(
        sum(contributions), rel=1e-8)


def test_by_month_hemisphere_emits_24_rows(tmp_path):
    write_anomaly_grid(tmp_path / "g.json")
    r = run_cli(["moments", "--variant", "stvar", "--grid", "g.json",
                 "--by-month-hemisphere", "--out", "m.csv"], tmp_path)
    assert r.returncode == 0, r.stderr
    rows = read_rows(tmp_path / "m.csv")
    assert len(rows) == 24
    slots = {(row["months"], row["hemisphere"]) for row in rows}
    assert len(slots) == 24


def test_sector_damages_from_monthly_moments(tmp_path):
    write_anomaly_grid(tmp_path / "g.json")
    run_cli(["moments", "--variant", "stvar", "--grid", "g.json",
             "--by-month-hemisphere", "--out", "m.csv"], tmp_path)
    r = run_cli(["sectors", "--damages", "--moments", "m.csv",
                 "--out", "sd.csv"], tmp_path)
    assert r.returncode == 0, r.stderr
    rows = read_rows(tmp_path / "sd.csv")
    per_sector = [r for r in rows if r["month"] == "ALL" and r["sector"] != "TOTAL"]
    total = [r for r in rows if r["sector"] == "TOTAL"]
    assert len(per_sector) == 15 and len(total) == 1
    assert float(total[0]["loss_fraction"]) == pytest.approx(
        sum(float(r["loss_fraction"]) for r in per_sector), rel=1e-8)


def test_scc_region_breakdown_sums_to_total(tmp_path):
    from climdamage import REGIONS

    write_series(tmp_path / "s.csv", np.linspace(1.0, 4.0, 81))
    write_gdp(tmp_path / "gdp.csv", regions=("GLOBAL", *REGIONS))
    r = run_cli(["scc", "--series", "s.csv", "--gdp", "gdp.csv",
                 "--variants", "none", "--rates", "0.03",
                 "--breakdown", "region", "--out", "scc.csv"], tmp_path)
    assert r.returncode == 0, r.stderr
    rows = read_rows(tmp_path / "scc.csv")
    total = [r for r in rows if r["name"] == "TOTAL"]
    parts = [float(r["scc_per_tco2"]) for r in rows if r["name"] != "TOTAL"]
    assert len(total) == 1 and len(parts) == 12
    assert float(total[0]["scc_per_tco2"]) == pytest.approx(sum(parts), rel=1e-7)


def test_reruns_and_threads_are_byte_identical(tmp_path):
    write_anomaly_grid(tmp_path / "g.json")
    write_series(tmp_path / "s.csv", np.linspace(0.5, 2.0, 12), start=2000)
    outputs = {}
    for name, threads in (("a", "1"), ("b", "1"), ("c", "4")):
        d = tmp_path / name
        d.mkdir()
        r = run_cli(["pattern", "--grid", "../g.json", "--series", "../s.csv",
                     "--threads", threads, "--out", "pat.json"], d)
        assert r.returncode == 0, r.stderr
        outputs[name] = (
            (d / "pat.json").read_bytes(), (d / "pat.csv").read_bytes()
        )
    assert outputs["a"] == outputs["b"] == outputs["c"]


def test_scc_output_stable_across_reruns(tmp_path):
    write_series(tmp_path / "s.csv", np.linspace(1.0, 4.0, 81))
    write_gdp(tmp_path / "gdp.csv")
    args = ["scc", "--series", "s.csv", "--gdp", "gdp.csv",
            "--variants", "none,tvar", "--rates", "0.04,0.015"]
    run_cli([*args, "--out", "one.csv"], tmp_path)
    run_cli([*args, "--out", "two.csv"], tmp_path)
    assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()


def test_json_mirror_matches_csv(tmp_path):
    r = run_cli(["decompose", *GOLDEN_PV, "--json", "--out", "split.csv"],
                tmp_path)
    assert r.returncode == 0, r.stderr
    payload = json.loads((tmp_path / "split.json").read_text())
    assert payload["columns"] == ["spatial_pct", "temporal_pct", "interaction_pct"]
    row, = read_rows(tmp_path / "split.csv")
    assert payload["rows"][0][0] == pytest.approx(float(row["spatial_pct"]), rel=1e-9)
    assert payload["meta"]["command"] == "decompose"


def test_missing_required_option_exits_1(tmp_path):
    r = run_cli(["moments", "--out", "m.csv"], tmp_path)
    assert r.returncode == 1
    assert "variant" in r.stderr


def test_unreadable_input_exits_1(tmp_path):
    r = run_cli(["damages", "--moments", "absent.csv", "--out", "d.csv"],
                tmp_path)
    assert r.returncode == 1
    assert "error" in r.stderr


def test_degenerate_decomposition_exits_2(tmp_path):
    r = run_cli(["decompose", "--none", "1", "--tvar", "1", "--svar", "1",
                 "--stvar", "1", "--out", "x.csv"], tmp_path)
    assert r.returncode == 2


def test_out_may_not_be_json(tmp_path):
    r = run_cli(["decompose", *GOLDEN_PV, "--out", "split.json"], tmp_path)
    assert r.returncode == 1


def test_config_file_fills_unset_options(tmp_path):
    (tmp_path / "run.ini").write_text(
        "[decompose]\nnone = 0\ntvar = 245.31\nsvar = 34647.70\n"
        "stvar = 47521.66\n"
    )
    r = run_cli(["decompose", "--config", "run.ini", "--out", "split.csv"],
                tmp_path)
    assert r.returncode == 0, r.stderr
    row, = read_rows(tmp_path / "split.csv")
    assert float(row["spatial_pct"]) == pytest.approx(72.91, abs=0.01)


def test_flags_override_config(tmp_path):
    # svar from the flag displaces the config value; with svar == stvar the
    # split becomes purely spatial
    (tmp_path / "run.ini").write_text(
        "[decompose]\nnone = 0\ntvar = 0\nsvar = 1\nstvar = 47521.66\n"
    )
    r = run_cli(["decompose", "--config", "run.ini", "--svar", "47521.66",
                 "--out", "split.csv"], tmp_path)
    assert r.returncode == 0, r.stderr
    row, = read_rows(tmp_path / "split.csv")
    assert float(row["spatial_pct"]) == pytest.approx(100.0, rel=1e-9)


def test_config_supplies_pulse_coefficients(tmp_path):
    # zero pulse amplitudes price nothing, whatever the scenario
    write_series(tmp_path / "s.csv", np.linspace(1.0, 4.0, 81))
    write_gdp(tmp_path / "gdp.csv")
    (tmp_path / "run.ini").write_text(
        "[pulse]\na1 = 0\na2 = 0\na3 = 0\ntau1 = 1\ntau2 = 1\ntau3 = 1\n"
    )
    r = run_cli(["scc", "--series", "s.csv", "--gdp", "gdp.csv",
                 "--variants", "none", "--rates", "0.03",
                 "--config", "run.ini", "--out", "scc.csv"], tmp_path)
    assert r.returncode == 0, r.stderr
    row, = read_rows(tmp_path / "scc.csv")
    assert float(row["scc_per_tco2"]) == 0.0


def test_metadata_header_present(tmp_path):
    run_cli(["decompose", *GOLDEN_PV, "--out", "split.csv"], tmp_path)
    lines = (tmp_path / "split.csv").read_text().splitlines()
    assert lines[0].startswith("# climdamage ")
    assert lines[1] == "# command decompose"
    assert lines[2].startswith("# config ")
