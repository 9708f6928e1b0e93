import json
import subprocess
import sys

import numpy as np
import pytest

from opertone.cli import main
from opertone.matcore import matrix_to_json

EXP_ARGS = ["verify", "--check", "derivative_sign", "--spec", "exp on (-1,1)", "--tone", "1", "--dims", "2", "--trials", "100", "--seed", "3", "--no-timestamp"]


def _write(tmp_path, name, M):
    path = tmp_path / name
    path.write_text(json.dumps(matrix_to_json(np.asarray(M, dtype=complex))))
    return str(path)


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_pass_exit_zero(capsys):
    code, out, _ = _run(["verify", "--check", "pick", "--spec", "pow 0.5 on (0,inf)", "--trials", "10", "--no-timestamp"], capsys)
    assert code == 0
    assert json.loads(out)[0]["verdict"] == "pass"


def test_verify_refuted_exit_two(capsys):
    code, out, err = _run(EXP_ARGS, capsys)
    assert code == 2 and "refuted" in err
    assert json.loads(out)[0]["verdict"] == "refuted"


def test_verify_inconclusive_exit_three(capsys):
    # same campaign with tau chosen so the worst margin falls in [-10 tau, -tau)
    code, out, _ = _run(EXP_ARGS, capsys)
    worst = json.loads(out)[0]["worst"]["margin"]
    code, out, _ = _run(EXP_ARGS + ["--tau", repr(-worst / 3)], capsys)
    assert code == 3 and json.loads(out)[0]["verdict"] == "inconclusive"


def test_env_tolerance_applies(capsys, monkeypatch):
    code, out, _ = _run(EXP_ARGS, capsys)
    worst = json.loads(out)[0]["worst"]["margin"]
    monkeypatch.setenv("OPERTONE_TOL", repr(-worst * 2))
    code, out, _ = _run(EXP_ARGS, capsys)
    assert code == 0 and json.loads(out)[0]["tau"] == -worst * 2


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--check", "pick", "--spec", "pow 0.5 on (0,inf) ?"],
        ["verify", "--check", "pick", "--spec", "monotone atoms [(-1, 0.5)]"],
        ["verify", "--check", "pick", "--spec", "log on (0,inf)", "--dims", "0"],
        ["verify", "--check", "branch", "--spec", "exp on (-1,1)"],
        ["verify", "--spec", "log on (0,inf)"],
        ["counterexample", "remark35_im"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_one(argv, capsys):
    code, _, err = _run(argv, capsys)
    assert code == 1 and err


def test_syntax_error_names_column(capsys):
    _, _, err = _run(["verify", "--check", "pick", "--spec", "pow 0.5 on (0,inf) ?"], capsys)
    assert "column" in err


def test_hypothesis_failure_exit_four(tmp_path, capsys):
    X = _write(tmp_path, "x.json", np.diag([-1.0, 2.0]))
    code, _, err = _run(["funcalc", "--spec", "log on (0,inf)", "--matrix", X], capsys)
    assert code == 4 and "hypothesis" in err


def test_funcalc_and_compare(tmp_path, capsys):
    X = _write(tmp_path, "x.json", np.diag([1.0, 2.0]) + 0.5j * np.eye(2))
    code, out, _ = _run(["funcalc", "--spec", "log on (0,inf)", "--matrix", X], capsys)
    val = json.loads(out)["value"]
    assert code == 0 and val["re"][0][0] == pytest.approx(np.log(abs(1 + 0.5j)))
    code, out, _ = _run(["funcalc", "--spec", "log on (0,inf)", "--matrix", X, "--compare"], capsys)
    assert code == 0 and json.loads(out)["rel_diff"] < 1e-8


def test_frechet_command(tmp_path, capsys):
    A = _write(tmp_path, "a.json", np.diag([1.0, 2.0]))
    B = _write(tmp_path, "b.json", np.eye(2))
    code, out, _ = _run(["frechet", "--spec", "inv on (0,inf)", "--A", A, "--B", B, "-m", "1"], capsys)
    val = np.array(json.loads(out)["value"]["re"])
    assert code == 0 and np.allclose(val, -np.diag([1.0, 0.25]))


@pytest.mark.parametrize("argv,code", [(["remark35_im", "--p", "1.5"], 0), (["remark48"], 0), (["remark35_re", "--p", "2.0"], 0)])
def test_counterexample_exit_codes(argv, code, capsys):
    got, out, _ = _run(["counterexample", *argv, "--budget", "256"], capsys)
    assert got == code and json.loads(out)["matches_expectation"]


def test_config_file_and_csv(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"check": "sector", "spec": "pow 0.5 on (0,inf)", "dims": [1, 2], "trials": 5, "options": {"p": 0.5}}))
    code, out, _ = _run(["verify", "--config", str(cfg), "--set", "cone=-1", "--csv"], capsys)
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "check,spec,n,trial,margin,verdict" and len(lines) == 11


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "opertone.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "verify" in proc.stdout
