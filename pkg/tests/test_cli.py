import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from nqs_uat.ansatz import loads_params, tabulate
from nqs_uat.cli import demo_necessity, main
from nqs_uat.fockspace import WavefunctionTable
from nqs_uat.verify import compare, random_target


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:  # argparse usage errors
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_body(text):
    return "".join(l + "\n" for l in text.splitlines() if not l.startswith("#"))


def test_construct_fnn_json(capsys, tmp_path):
    params_path = tmp_path / "params.json"
    code, out, _ = run(["construct", "--K", "4", "--seed", "7", "--builder", "fnn",
                        "--output", str(params_path)], capsys)
    assert code == 0
    report = json.loads(out)
    assert report["builder"] == "fnn" and report["max_abs"] < 1e-10 and report["seed"] == 7
    params = loads_params(params_path.read_text())
    assert compare(tabulate(params), random_target(4, 7)).max_abs < 1e-10


def test_construct_general_csv(capsys):
    code, out, _ = run(["construct", "--K", "3", "--builder", "nps-general", "--activation", "cos",
                        "--delta", "1e-4", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 8
    assert sum(1 for r in rows if r["row"] == "subset") == 7


def test_construct_from_input(capsys, tmp_path):
    path = tmp_path / "psi.json"
    psi = WavefunctionTable(2, [0.5, -0.5, 0.5, 0.5])
    path.write_text(psi.dumps())
    code, out, _ = run(["construct", "--input", str(path), "--builder", "nps-sat"], capsys)
    assert code == 0
    assert json.loads(out)["seed"] is None


def test_construct_nnbf_default_sector(capsys):
    code, out, err = run(["construct", "--K", "4", "--builder", "nnbf"], capsys)
    assert code == 0 and "Warning" not in err
    assert json.loads(out)["max_abs"] < 1e-8


def test_tolerance_failure_exit(capsys):
    code, _, _ = run(["construct", "--K", "3", "--builder", "fnn", "--theta", "1"], capsys)
    assert code == 2


@pytest.mark.parametrize("argv", [
    ["construct", "--K", "3", "--builder", "nps-sat", "--activation", "cos"],
    ["construct", "--K", "3", "--builder", "nps-general", "--activation", "exp-poly:2"],
    ["construct", "--K", "3", "--builder", "nps-general", "--activation", "exp"],
    ["construct", "--K", "3", "--builder", "fnn", "--activation", "tanh"],
])
def test_contract_violation_exit(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 3 and "contract violation" in err


def test_io_exit(capsys, tmp_path):
    code, _, _ = run(["construct", "--input", str(tmp_path / "missing.json")], capsys)
    assert code == 4
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["construct", "--input", str(bad)], capsys)[0] == 4
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"K": 1, "basis": "fourier", "amplitudes": [1, 0]}))
    assert run(["construct", "--input", str(wrong)], capsys)[0] == 4


@pytest.mark.parametrize("argv", [
    ["construct"],
    ["construct", "--K", "3", "--theta", "-1"],
    ["construct", "--K", "3", "--activation", "softplus"],
    ["construct", "--K", "3", "--builder", "mps"],
    ["construct", "--K", "3", "--builder", "nnbf", "--N", "9"],
    ["sweep", "--K", "3", "--grid", ""],
    ["sweep", "--K", "3"],
    ["frobnicate"],
])
def test_usage_exit(argv, capsys):
    assert run(argv, capsys)[0] == 5


def test_sweep_fnn_monotone(capsys):
    code, out, _ = run(["sweep", "--K", "4", "--builder", "fnn", "--grid", "10,20,40,80",
                        "--seeds", "0,1,2"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(csv_body(out))))
    assert len(rows) == 12
    for seed in "012":
        errs = [float(r["max_abs"]) for r in rows if r["seed"] == seed]
        assert [float(r["knob"]) for r in rows if r["seed"] == seed] == [10, 20, 40, 80]
        assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_sweep_general_decreasing(capsys):
    code, out, _ = run(["sweep", "--K", "3", "--builder", "nps-general", "--grid", "1e-2,1e-3,1e-4"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(csv_body(out))))
    errs = [float(r["max_abs"]) for r in sorted(rows, key=lambda r: -float(r["knob"]))]
    assert errs[0] > errs[1] > errs[2]


def test_sweep_byte_identical(capsys, monkeypatch):
    argv = ["sweep", "--K", "3", "--builder", "nps-sat", "--grid", "20,40", "--seeds", "3,1,2", "--no-timing"]
    _, first, _ = run(argv, capsys)
    monkeypatch.setenv("NQS_UAT_THREADS", "4")
    _, second, _ = run(argv, capsys)
    assert first.startswith("# generated")
    assert csv_body(first) == csv_body(second)


def test_demo_necessity_values():
    r = demo_necessity(3)
    assert r["top_residual"] == pytest.approx(1.0, abs=1e-12)
    assert r["best_effort_top_residual"] == pytest.approx(1.0, abs=1e-9)
    assert r["admissible_max_abs"] < 1e-2
    r1 = demo_necessity(1)
    assert r1["top_residual"] == pytest.approx(1.0, abs=1e-12)


def test_demo_necessity_cli(capsys):
    code, out, _ = run(["demo-necessity", "--K", "2", "--g", "0.5"], capsys)
    assert code == 0
    assert json.loads(out)["top_residual"] == pytest.approx(0.5, abs=1e-12)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nqs_uat", "construct", "--K", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["builder"] == "fnn"
