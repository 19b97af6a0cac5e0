"""Command line surface: artifacts, formats, exit codes."""

import csv
import io
import json
import shutil
import subprocess

import pytest

from donorgate.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_exchange_curve_csv_columns(capsys):
    code, out, _ = _run(capsys, "exchange", "curve",
                        "--binding-ev", "0.6", "--epsilon", "5.7",
                        "--qubit-scale", "1.0",
                        "--r-min", "4", "--r-max", "6", "--r-step", "1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["R_angstrom", "J_ground_meV", "J_excited_meV"]
    assert len(rows) == 4
    for row in rows[1:]:
        r, jg, je = map(float, row)
        assert jg > 0 and je > 0


def test_splitting_curve_from_preset(capsys):
    code, out, _ = _run(capsys, "splitting", "curve", "--preset", "fig3",
                        "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:3] == ["R_angstrom", "t_meV", "splitting_meV"]
    first = dict(zip(rows[0], map(float, rows[1])))
    assert first["splitting_mev" if "splitting_mev" in first else "splitting_meV"] \
        == pytest.approx(2 * first["t_meV"], rel=1e-9)


def test_lattice_count_json(capsys):
    code, out, _ = _run(capsys, "lattice", "count", "--radius", "7.5",
                        "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert report["enumerated_count"] == 293
    assert report["continuum_estimate"] == pytest.approx(311.5, abs=0.1)


def test_lattice_shells_csv(capsys):
    code, out, _ = _run(capsys, "lattice", "shells", "--shells", "4")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["shell", "distance_angstrom", "sites"]
    assert len(rows) == 5
    assert int(rows[1][2]) == 4
    assert float(rows[1][1]) == pytest.approx(3.567 * 3 ** 0.5 / 4, rel=1e-6)


def test_emt_json(capsys):
    code, out, _ = _run(capsys, "emt", "--binding-ev", "0.6",
                        "--epsilon", "5.7", "--format", "json")
    assert code == 0
    model = json.loads(out)
    assert model["effective_bohr_radius_a"] == pytest.approx(2.1036, abs=1e-4)
    assert model["species"] == "P"


def test_dope_stats_seed_override(capsys):
    args = ("dope", "stats", "--radius", "20", "--concentration", "0.02",
            "--format", "json")
    _, out_a, _ = _run(capsys, *args, "--seed", "4")
    _, out_b, _ = _run(capsys, *args, "--seed", "4")
    _, out_c, _ = _run(capsys, *args, "--seed", "5")
    assert out_a == out_b
    a, c = json.loads(out_a), json.loads(out_c)
    assert a["analytic"] == c["analytic"]
    assert a["empirical"] != c["empirical"]


def test_gate_run_json(capsys):
    code, out, _ = _run(capsys, "gate", "run", "--j1", "20", "--j2", "20",
                        "--format", "json")
    assert code == 0
    gate = json.loads(out)
    assert gate["clean"] is True
    assert gate["entangling_power"] == pytest.approx(0.125, abs=1e-5)
    assert len(gate["qubit_unitary"]) == 4


def test_configure_scan_artifact(capsys):
    code, out, _ = _run(capsys, "configure", "scan", "--preset", "table1",
                        "--format", "csv")
    assert code == 0
    header = out.splitlines()[0].split(",")
    assert header[0] == "optical_mev"
    assert all(col.startswith("epr_") for col in header[1:])
    assert len(out.splitlines()) > 10


def test_configure_infer_round_trip(capsys):
    code, out, _ = _run(capsys, "configure", "infer", "--preset", "table1",
                        "--format", "json")
    assert code == 0
    inferred = json.loads(out)
    joined = {}
    for entry in inferred["entries"]:
        assert not entry["ambiguous"]
        joined.update(entry["couplings"])
    assert joined["Q1"] == pytest.approx(116.44, rel=1e-3)
    assert joined["Q3"] == pytest.approx(147.52, rel=1e-3)


def test_feasibility_run_report(capsys, tmp_path):
    out_file = tmp_path / "report.json"
    code, out, _ = _run(capsys, "feasibility", "run", "--preset", "table1",
                        "--out", str(out_file))
    assert code == 0
    assert out == ""
    report = json.loads(out_file.read_text())
    assert report["configuration"]["recovered"] is True
    assert report["targets"]["gates_met"] is True


def test_scenario_file_input(capsys, tmp_path):
    from donorgate import get_preset, save_scenario
    _, sc = get_preset("table1")
    path = tmp_path / "cluster.json"
    save_scenario(sc, path)
    code, out, _ = _run(capsys, "configure", "infer",
                        "--scenario", str(path), "--format", "json")
    assert code == 0
    assert len(json.loads(out)["entries"]) == 2


def test_presets_list(capsys):
    code, out, _ = _run(capsys, "presets", "list", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["name", "kind", "summary"]
    assert {r[0] for r in rows[1:]} == {"table1", "fig2a", "fig2b", "fig3",
                                        "shen-nv"}


def test_errors_exit_nonzero_with_message(capsys):
    code, out, err = _run(capsys, "exchange", "curve",
                          "--binding-ev", "-3", "--epsilon", "5.7")
    assert code == 2
    assert err.startswith("donorgate: error:")

    code, _, err = _run(capsys, "configure", "infer", "--preset", "nosuch")
    assert code == 2
    assert "unknown preset" in err


def test_stage_failures_surface_the_stage(capsys, tmp_path):
    import dataclasses
    from donorgate import get_preset, save_scenario
    _, sc = get_preset("table1")
    clash = dataclasses.replace(sc.placements[1],
                                position_a=sc.placements[0].position_a)
    bad = dataclasses.replace(sc, placements=(sc.placements[0], clash)
                              + sc.placements[2:])
    path = tmp_path / "clash.json"
    save_scenario(bad, path)
    code, _, err = _run(capsys, "feasibility", "run", "--scenario", str(path))
    assert code == 2
    assert "stage 'integrals' failed" in err


def test_console_script_runs():
    script = shutil.which("donorgate")
    if script is None:
        pytest.skip("console script not installed")
    proc = subprocess.run([script, "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip().count(".") == 2
