from __future__ import annotations

import json
import math
import subprocess
import sys

import pytest

from omegastop.cli import encode, main

FIXTURE = ["--alpha", "1", "--rho", "0.5", "--k", "0.3183098861837907"]
KEYS = {"command", "model", "result", "diagnostics", "version", "wall_ms"}


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, (json.loads(out.out) if code == 0 else None), out.err


def test_model_command(capsys):
    code, report, _ = run(capsys, ["model", *FIXTURE])
    assert code == 0
    assert set(report) == KEYS
    assert report["model"]["p"] == pytest.approx(0.5, abs=1e-10)
    assert report["model"]["delta"] == pytest.approx(0.25, abs=1e-10)
    assert report["diagnostics"]["identity_residual"] <= 1e-12


def test_solve_command(capsys):
    code, report, _ = run(capsys, ["solve", *FIXTURE, "--r", "0.1", "--x", "1", "100"])
    assert code == 0
    res = report["result"]
    assert res["regime"] == "CallFinite"
    assert res["b_star"] == pytest.approx(41.00662893329544, rel=1e-9)
    assert res["values"][0]["v"] == pytest.approx(0.16876650217583444, rel=1e-9)
    assert res["values"][1]["v"] == pytest.approx(100 ** 0.1 - 1, rel=1e-12)


def test_infinite_value_is_encoded_as_text(capsys):
    code, report, _ = run(capsys, ["solve", *FIXTURE, "--r", "0.3", "--x", "1"])
    assert code == 0
    assert report["result"]["regime"] == "InfiniteValue"
    assert report["result"]["values"][0]["v"] == "infinite"


@pytest.mark.parametrize("argv", [
    ["model", "--alpha", "1.5", "--rho", "0.2", "--k", "1"],
    ["solve", *FIXTURE, "--r", "0.25"],
    ["solve", "--alpha", "1", "--rho", "0.5", "--k", "0", "--r", "0.1"],
    ["simulate", *FIXTURE, "--mode", "bogus"],
    ["simulate", *FIXTURE, "--mode", "policy", "--r", "0.1"],
    ["simulate", *FIXTURE, "--mode", "p", "--threshold", "3"],
])
def test_user_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, argv)
    assert code == 2
    assert "error" in err


def test_simulate_is_deterministic_apart_from_timing(capsys):
    argv = ["simulate", *FIXTURE, "--mode", "p", "--n", "500", "--seed", "7"]
    _, first, _ = run(capsys, argv)
    _, second, _ = run(capsys, argv)
    first.pop("wall_ms")
    second.pop("wall_ms")
    assert first == second
    assert set(first["result"]) >= {"estimate", "std_error", "comparator", "z_score"}


def test_simulate_dump(capsys, tmp_path):
    target = tmp_path / "d.csv"
    code, report, _ = run(capsys, ["simulate", *FIXTURE, "--mode", "value", "--r", "0.1", "--n", "20",
                                   "--dump", str(target), "--dump-paths", "2", "--horizon", "5"])
    assert code == 0
    assert report["result"]["dump"]["rows"] == len(target.read_text().splitlines()) - 1


def test_encode_precision():
    assert encode(0.1) == "0.10000000000000001"
    assert encode(math.inf) == '"infinite"'
    assert json.loads(encode({"a": [1, 2.5]})) == {"a": [1, 2.5]}


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "omegastop", "model", *FIXTURE],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert set(json.loads(proc.stdout)) == KEYS
