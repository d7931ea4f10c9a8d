import json
import subprocess
import sys
from pathlib import Path

import pytest

from loopqec.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_code_cycle_text(capsys):
    code, out, _ = run(capsys, "code", "cycle", "--preset", "edsr", "--seed", "1")
    assert code == 0 and "T_cycle 3.85 us" in out


def test_scheme_solve_text(capsys):
    code, out, _ = run(capsys, "scheme", "solve", "--preset", "edsr", "-k", "10", "-m", "3", "--seed", "1")
    assert code == 0 and out.startswith("gap 0.125 us  T_cycle 3.85 us")


def test_pipe_time_single_step(capsys):
    code, out, _ = run(capsys, "pipe", "time", "--durations", "7", "-k", "1", "--seed", "1")
    res = json.loads(out)
    assert code == 0 and res["T_pipe"] == 7 and res["agree"]


@pytest.mark.parametrize("k, fits", [(2, True), (3, False)])
def test_pipe_collide(tmp_path, capsys, k, fits):
    from loopqec.hardware import preset
    from loopqec.schedules import surface_data_pipeline

    spec = tmp_path / "data.json"
    spec.write_text(json.dumps(surface_data_pipeline(preset("edsr")).to_json()))
    code, out, _ = run(capsys, "pipe", "collide", "--spec", str(spec), "-k", str(k), "--gap", "1000", "--seed", "1")
    res = json.loads(out)
    assert code == 0 and res["K_loop"] == 2 and res["fits"] is fits
    assert (res["collision"] is None) is fits


def test_pipe_collide_needs_loop(capsys):
    assert run(capsys, "pipe", "collide", "--durations", "1", "--seed", "1")[0] == 1


def test_usage_errors(capsys):
    assert run(capsys, "code", "cycle", "--bogus")[0] == 1
    assert run(capsys, "nonsense")[0] == 1
    code, _, err = run(capsys, "threshold", "sweep", "--seed", "1")
    assert code == 1 and "--config" in err


def test_infeasible_exit_code(capsys):
    code, _, err = run(capsys, "scheme", "solve", "--preset", "esr", "-k", "10", "-m", "3", "--seed", "1")
    assert code == 2 and "sub-CZ gap" in err


def test_msd_table_csv(capsys):
    code, out, _ = run(capsys, "msd", "table", "--format", "csv", "--seed", "1")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0].startswith("code,k,m,A,D_coefficient")
    assert any(line.startswith("surface,10,3,1,3,") and line.endswith(",4.3,220") for line in lines)


def test_ft_table(capsys):
    code, out, _ = run(capsys, "ft", "table", "-k", "5,10", "--format", "json", "--seed", "1")
    rows = json.loads(out)["rows"]
    assert code == 0 and {r["k"] for r in rows} == {5, 10}


def test_manifest_written(tmp_path, capsys):
    code, _, _ = run(capsys, "code", "cycle", "--format", "json", "--out", str(tmp_path), "--seed", "3")
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert code == 0 and man["seed"] == 3
    assert man["outputs"] == [str(tmp_path / "code_cycle.json")]


def test_entropy_seed_recorded(capsys):
    run(capsys, "code", "cycle")
    code = main(["code", "cycle"])
    _, err = capsys.readouterr()
    assert code == 0 and isinstance(json.loads(err)["seed"], int)


def _threshold_json(capsys, threads):
    code, out, _ = run(capsys, "threshold", "run", "--distances", "3,5", "--shots", "6000",
                       "--p", "0.006", "--p-leak", "0.001", "--seed", "42", "--threads", str(threads))
    assert code == 0
    return out


def test_threshold_run_reproducible_across_threads(capsys):
    assert _threshold_json(capsys, 1) == _threshold_json(capsys, 4)


def test_threshold_sweep_writes_csv(tmp_path, capsys):
    code, out, _ = run(capsys, "threshold", "sweep", "--config", str(CONFIGS / "quick.toml"),
                       "--out", str(tmp_path), "--seed", "1", "--threads", "2")
    assert code == 0
    res = json.loads(out)
    assert len(res["points"]) == 8
    assert (tmp_path / "threshold_sweep.csv").read_text().startswith("param,value,d,")
    svg = tmp_path / "curves.svg"
    code, _, _ = run(capsys, "plot", str(tmp_path / "threshold_sweep.csv"), str(svg),
                     "--x", "value", "--y", "rate", "--group", "d", "--logy", "--seed", "1")
    assert code == 0 and svg.read_text().startswith("<svg")


def test_qem_run(capsys):
    code, out, _ = run(capsys, "qem", "run", "--config", str(CONFIGS / "qem_ghz.json"), "--seed", "1")
    res = json.loads(out)
    assert code == 0
    assert abs(res["purified"] - 1) < abs(res["raw"] - 1)
    assert res["hadamard_test"] == pytest.approx(res["permutation_numerator"], abs=1e-9)


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "loopqec.cli", "code", "cycle", "--seed", "0"],
                         capture_output=True, text=True, check=True)
    assert "T_cycle 3.85 us" in out.stdout


def test_ft_ops(capsys):
    code, out, _ = run(capsys, "ft", "ops", "-d", "5", "--format", "json", "--seed", "1")
    rows = {r["op"]: r for r in json.loads(out)["rows"]}
    assert code == 0 and rows["H"]["surface"] == 15 and rows["H"]["colour"] == 0
    assert rows["T_init"]["surface"] == 6
