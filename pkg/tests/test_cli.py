from __future__ import annotations

import csv
import json

import pytest

from brusselator_gsp.cli import main


def _run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path), "--no-timestamp"])


def test_simulate_defaults(tmp_path):
    assert _run(tmp_path, "simulate", "--duration", "5") == 0
    doc = json.loads((tmp_path / "simulate.json").read_text())
    assert doc["frame"] == "XY"
    assert "generated" not in doc
    with open(tmp_path / "trajectory.csv") as fh:
        head = next(csv.reader(fh))
    assert head[:7] == ["clock", "tau", "t", "t1", "t2", "tau2", "chart_time"]
    assert head[7:] == ["X", "Y"]


def test_simulate_plot(tmp_path):
    assert _run(tmp_path, "simulate", "--frame", "rescaled", "--duration", "5", "--plot") == 0
    svg = (tmp_path / "trajectory.svg").read_text()
    assert svg.startswith("<svg") or svg.startswith("<?xml")
    assert "RESCALED" in svg


def test_output_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert _run(d, "simulate", "--frame", "RESCALED", "--start", "1.0,0.3", "--duration", "10") == 0
    for name in ("simulate.json", "trajectory.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_timestamp_is_written_by_default(tmp_path):
    assert main(["simulate", "--duration", "1", "--out", str(tmp_path)]) == 0
    assert "generated" in json.loads((tmp_path / "simulate.json").read_text())


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--frame", "NOPE"],
        ["simulate", "--duration", "0"],
        ["simulate", "--frame", "RESCALED", "--start", "1.0"],
        ["simulate", "--start", "a,b"],
        ["sweep", "--quantity", "period"],
        ["sweep", "--quantity", "rho_eps", "--grid", "0.5,0.6"],
        ["charts-check", "--samples", "0"],
        ["export", "--rho-eps", "-1"],
    ],
)
def test_validation_errors_exit_2(tmp_path, argv):
    assert _run(tmp_path, *argv) == 2


def test_argparse_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--duration", "x"])
    assert exc.value.code == 2


def test_numerical_failure_exits_3(tmp_path):
    # eta3**6 beyond the series range of the chart field
    rc = _run(tmp_path, "simulate", "--frame", "K3", "--start", "0.9,0.3,0.1", "--duration", "1")
    assert rc == 3


def test_cycle_command(tmp_path):
    assert _run(tmp_path, "cycle", "--plot", "--rescaled") == 0
    doc = json.loads((tmp_path / "cycle.json").read_text())
    assert set(doc["legs"]) == {"sigma1", "sigma2", "sigma3", "sigma4"}
    assert doc["rho_eps"] > 0
    assert doc["polyline"] == "cycle_polyline.csv"
    svg = (tmp_path / "cycle.svg").read_text()
    for k in (2, 3, 4):
        assert f"sigma-bar {k}" in svg


def test_export_command(tmp_path):
    assert _run(tmp_path, "export", "--rho-eps", "0.05") == 0
    rows = list(csv.DictReader(open(tmp_path / "sigma_curves.csv")))
    assert {r["label"] for r in rows} == {"sigma_1", "sigma_2", "sigma_3", "sigma_4"}
    assert (tmp_path / "singular_cycle.csv").exists()


def test_charts_check_passes(tmp_path):
    assert _run(tmp_path, "charts-check", "--samples", "10") == 0
    doc = json.loads((tmp_path / "charts_check.json").read_text())
    assert doc["pass"] and doc["k2_fold"]["nondegenerate"]


def test_bounds_check_passes(tmp_path):
    assert _run(tmp_path, "bounds-check", "--delta", "0.2", "--samples", "20") == 0
    doc = json.loads((tmp_path / "bounds_check.json").read_text())
    assert doc["pass"]
    assert len(doc["initials"]) == 20


def test_single_quantity_sweep(tmp_path):
    assert _run(tmp_path, "sweep", "--quantity", "exit_image", "--grid", "0.02,0.04,0.08,0.12") == 0
    doc = json.loads((tmp_path / "sweep.json").read_text())
    assert 2.7 <= doc["fit"]["slope"] <= 3.3
