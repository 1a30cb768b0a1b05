import csv
import io
import json
import subprocess
import sys

import pytest

from slicekit.cli import main, parse_config
from slicekit.cli import UsageError

BALL3 = '{"type":"ball","dim":3}'


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_happy_path():
    cfg = parse_config(["verify", "--ineq", "eq4", "--body", BALL3, "--density", "uniform", "--level", "32"])
    assert cfg.command == "verify" and cfg.ineq == "eq4-thm1" and cfg.level == 32 and cfg.fmt == "json"
    assert parse_config(["suite", "--dims", "2-4"]).dims == (2, 3, 4)
    assert parse_config(["suite"]).fmt == "csv"


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--ineq", "eq9", "--body", BALL3],
        ["verify", "--body", BALL3],
        ["verify", "--ineq", "eq2", "--body", BALL3, "--bogus"],
        ["verify", "--ineq", "eq2", "--body", BALL3, "--level", "2"],
        ["verify", "--ineq", "eq2", "--body", BALL3, "--dim", "1"],
        ["suite", "--dims", "a-b"],
        [],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = call(capsys, *argv)
    assert code == 2 and out == "" and "error" in err
    with pytest.raises(UsageError):
        parse_config(argv)


@pytest.mark.parametrize(
    "body, density, needle",
    [
        ('{"type":"lp-ball","dim":3}', "uniform", "'p'"),
        ('{"type":"ball","dim":3', "uniform", "malformed"),
        ('{"type":"blob","dim":3}', "uniform", "unknown body type"),
        (BALL3, "no-such-density", "density"),
        ("/nonexistent/body.json", "uniform", "neither"),
    ],
)
def test_data_errors_exit_3(capsys, body, density, needle):
    code, out, err = call(capsys, "verify", "--ineq", "eq4", "--body", body, "--density", density)
    assert code == 3 and needle in err


def test_capability_errors_exit_4(capsys):
    code, _, err = call(capsys, "verify", "--ineq", "eq2", "--body", '{"type":"cube","dim":5}')
    assert code == 4 and "intersection body" in err
    code, _, _ = call(capsys, "verify", "--ineq", "eq4", "--body", '{"type":"ball","dim":7}', "--scheme", "gauss")
    assert code == 4


def test_stability_precondition_exit_3(capsys):
    code, _, err = call(capsys, "stability", "--body", BALL3, "--density", "0.5")
    assert code == 3 and "f >= 1" in err


def test_eq2_ball_ratio(capsys):
    code, out, _ = call(capsys, "verify", "--ineq", "eq2", "--body", BALL3)
    rep = json.loads(out)
    assert code == 0 and rep["pass"] is True
    assert rep["ratio"] == pytest.approx(1.0, abs=1e-6)


def test_eq4_ball_lhs(capsys):
    code, out, _ = call(capsys, "verify", "--ineq", "eq4", "--body", BALL3, "--density", "uniform", "--level", "32")
    rep = json.loads(out)
    assert code == 0 and rep["pass"]
    assert rep["lhs"] == pytest.approx(4.188790, abs=1e-6)
    assert "sandwich" in rep["details"]


def test_radon_selftest(capsys):
    code, out, _ = call(capsys, "radon-selftest", "--dim", "3", "--level", "32")
    rep = json.loads(out)
    assert code == 0 and rep["selfdualRelative"] < 1e-6


def test_failed_check_exits_1(capsys):
    # too coarse for the self-duality tolerance
    code, out, _ = call(capsys, "radon-selftest", "--dim", "3", "--level", "4")
    assert code == 1 and json.loads(out)["pass"] is False


def test_byte_stable_and_timestamps(capsys):
    argv = ["verify", "--ineq", "eq3", "--body", '{"type":"lp-ball","dim":3,"p":3}', "--density", "gaussian"]
    first = call(capsys, *argv)[1]
    second = call(capsys, *argv)[1]
    assert first == second and "timestamp" not in first
    stamped = json.loads(call(capsys, *argv, "--timestamps")[1])
    assert "timestamp" in stamped


def test_csv_and_out_file(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code, printed, _ = call(capsys, "verify", "--ineq", "eq2", "--body", BALL3, "--format", "csv", "--out", str(out))
    assert code == 0 and printed == ""
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0] == ["id", "n", "body", "density", "lhs", "rhs", "slack", "ratio", "pass"]
    assert rows[1][0] == "eq2-ib-volume" and rows[1][-1] == "true"


def test_body_from_file_and_stability(tmp_path, capsys):
    path = tmp_path / "ball.json"
    path.write_text(BALL3)
    code, out, _ = call(capsys, "stability", "--body", str(path), "--density", "1.1")
    rep = json.loads(out)
    assert code == 0 and rep["inequalityId"] == "stability" and set(rep["chain"]) == {"stability", "integrated", "lowerBound", "holder"}


def test_oracle_and_bodies(capsys):
    code, out, _ = call(capsys, "oracle", "--body", BALL3, "--density", "gaussian", "--samples", "200000")
    assert code == 0 and abs(json.loads(out)["z"]) <= 3
    code, out, _ = call(capsys, "bodies", "--dim", "4")
    assert code == 0 and {row["type"] for row in json.loads(out)} >= {"ball", "cube", "h-polytope"}


def test_small_suite_and_threads(capsys):
    a = call(capsys, "suite", "--dims", "2", "--threads", "1")
    b = call(capsys, "suite", "--dims", "2", "--threads", "3")
    assert a[0] == 0 and a[1] == b[1]
    assert len(a[1].strip().splitlines()) == 1 + 7 * 4


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "slicekit.cli", "verify", "--ineq", "eq9"], capture_output=True, text=True)
    assert res.returncode == 2
