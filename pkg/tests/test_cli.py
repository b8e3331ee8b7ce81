import subprocess
import sys

import numpy as np
import pytest

from fdsic import cli
from fdsic.errors import ConfigurationError, EstimationError


@pytest.fixture
def scenario(tmp_path):
    path = tmp_path / "scenario.ini"
    path.write_text("n_realizations = 2\ntx_power_dbm = 10\n")
    return str(path)


def test_parse_values():
    assert cli.parse_values("0, 2.5,5") == [0.0, 2.5, 5.0]
    for bad in ("", "1,x"):
        with pytest.raises(ConfigurationError):
            cli.parse_values(bad)


@pytest.mark.parametrize("text, expected", [
    ("0:10:5", [0, 5, 10]),
    ("0:9:5", [0, 5]),
    ("0:25:2.5", np.arange(0, 25.1, 2.5)),
    ("3:3:1", [3]),
])
def test_parse_range(text, expected):
    np.testing.assert_allclose(cli.parse_range(text), expected)


@pytest.mark.parametrize("text", ["0:10", "a:b:c", "0:10:0", "10:0:1", "0:10:-1"])
def test_parse_range_errors(text):
    with pytest.raises(ConfigurationError):
        cli.parse_range(text)


def test_budget_command(scenario, tmp_path):
    out = tmp_path / "b.csv"
    assert cli.main(["budget", "--scenario", scenario, "--out", str(out), "--tx-range", "0:14:14"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("tx_power_dbm,soi_dbm,linear_si_dbm,nonlinear_si_dbm")
    assert [l.split(",")[3] for l in lines[1:]] == ["-140.000000", "-98.000000"]


def test_run_command(scenario, tmp_path):
    out = tmp_path / "r.csv"
    assert cli.main(["run", "--scenario", scenario, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "realization,mode,sinr_db,digital_cancellation_db,residual_si_dbm"
    assert [l.split(",")[:2] for l in lines[1:]] == [["0", "nonlinear"], ["1", "nonlinear"], ["mean", "nonlinear"]]


def test_sweep_command_to_stdout(scenario, capsys):
    rc = cli.main(["sweep", "--scenario", scenario, "--out", "-", "--variable", "tx_power", "--values", "0,20"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 7
    assert [l.split(",")[1] for l in lines[1:4]] == ["linear", "nonlinear", "no_si"]


def test_repeated_runs_are_byte_identical(scenario, tmp_path):
    paths = [tmp_path / f"{k}.csv" for k in range(2)]
    for p in paths:
        assert cli.main(["sweep", "--scenario", scenario, "--out", str(p), "--variable", "iip3",
                         "--values", "10,20"]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


@pytest.mark.parametrize("content", ["warp_drive = 1\n", "tx_power_dbm = hot\n", "n_realizations = 0\n"])
def test_bad_scenario_exit_code(tmp_path, content, capsys):
    path = tmp_path / "bad.ini"
    path.write_text(content)
    assert cli.main(["run", "--scenario", str(path), "--out", "-"]) == cli.EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_missing_scenario_file(tmp_path):
    assert cli.main(["budget", "--scenario", str(tmp_path / "nope"), "--out", "-",
                     "--tx-range", "0:1:1"]) == cli.EXIT_CONFIG


def test_bad_range_exit_code(scenario):
    assert cli.main(["budget", "--scenario", scenario, "--out", "-", "--tx-range", "5:0:1"]) == cli.EXIT_CONFIG


def test_bad_jobs_exit_code(scenario):
    assert cli.main(["run", "--scenario", scenario, "--out", "-", "--jobs", "0"]) == cli.EXIT_CONFIG


def test_estimation_failure_exit_code(scenario, monkeypatch, capsys):
    def fail(*args, **kwargs):
        raise EstimationError("regression matrix is rank deficient", condition=1e17)

    monkeypatch.setattr(cli, "run_scenario", fail)
    assert cli.main(["run", "--scenario", scenario, "--out", "-"]) == cli.EXIT_ESTIMATION
    assert "rank deficient" in capsys.readouterr().err


def test_unknown_variable_is_usage_error(scenario):
    with pytest.raises(SystemExit) as info:
        cli.main(["sweep", "--scenario", scenario, "--out", "-", "--variable", "bandwidth", "--values", "1"])
    assert info.value.code == 2


def test_console_script_entry_point(scenario):
    res = subprocess.run([sys.executable, "-m", "fdsic.cli", "budget", "--scenario", scenario, "--out", "-",
                          "--tx-range", "0:0:1"], capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1].startswith("0.000000,-83.900000,")
