"""
Test module for the command-line driver.
"""

import json

import pytest

from src.cli.app import ExitStatus, main
from tests.spec_factory import CORPUS_DIR


@pytest.fixture(autouse=True)
def isolated_env(tmp_path, monkeypatch):
    """Fixture for a clean working directory and environment."""
    monkeypatch.chdir(tmp_path)
    for key in ("LOCO_COLOR", "LOCO_DEFAULT_FUEL", "LOCO_DEFAULT_SEED", "LOCO_ORACLE_MAX_CAP",
                "LOCO_PROPAGATION_MAX_STEPS", "LOCO_LOG_LEVEL", "LOCO_LOG_FORMAT"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.setenv("LOCO_COLOR", "0")


def corpus(name: str) -> str:
    return str(CORPUS_DIR / name)


def test_check_accepts_bin_packing(capsys):
    """Test check on an admissible spec."""
    assert main(["check", corpus("bin_packing.loco")]) == ExitStatus.OK
    assert capsys.readouterr().out == ""


def test_check_reports_unleveled(capsys):
    """Test check on a spec with mutually grounded kinds."""
    assert main(["check", corpus("unleveled.loco")]) == ExitStatus.VALIDATION
    err = capsys.readouterr().err
    assert "UNLEVELED" in err


def test_bounds_table(capsys):
    """Test the plain bounds table of the bin-packing instance."""
    assert main(["bounds", corpus("bin_packing.loco")]) == ExitStatus.OK
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["ThingA [20, 20]", "ThingB [20, 20]", "Bin [10, 40]"]


def test_bounds_reject(capsys):
    """Test REJECT output and status on the conflicting chain."""
    assert main(["bounds", corpus("conflict.loco")]) == ExitStatus.REJECT
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "REJECT C2: lb 5 > ub 4"


def test_bounds_report_documents(capsys):
    """Test the JSON report for both verdicts."""
    assert main(["bounds", corpus("bin_packing.loco"), "--format", "report"]) == ExitStatus.OK
    document = json.loads(capsys.readouterr().out)
    assert document["verdict"] == "accept"
    assert {"kind": "Bin", "lb": 10, "ub": 40, "class": "generated"} in document["bounds"]

    assert main(["bounds", corpus("conflict.loco"), "--format", "report"]) == ExitStatus.REJECT
    document = json.loads(capsys.readouterr().out)
    assert document["verdict"] == "reject"
    assert (document["certificate"]["kind"], document["certificate"]["lb"]) == ("C2", 5)


def test_solve_prints_configuration(capsys):
    """Test a solved instance prints one configuration document."""
    assert main(["solve", corpus("small_bin_packing.loco")]) == ExitStatus.OK
    document = json.loads(capsys.readouterr().out)
    assert len(document["configurations"]) == 1
    config = document["configurations"][0]
    assert len(config["instances"]["Bin"]) == 1
    assert len(config["edges"]["ThingA2Bin"]) == 4


def test_solve_writes_out_file(tmp_path, capsys):
    """Test --out writes the document instead of printing it."""
    target = tmp_path / "solution.json"
    assert main(["solve", corpus("two_thinga.loco"), "--max", "5", "--out", str(target)]) == ExitStatus.OK
    assert capsys.readouterr().out == ""
    document = json.loads(target.read_text(encoding="utf-8"))
    assert sorted(len(c["instances"]["Bin"]) for c in document["configurations"]) == [1, 2]


def test_solve_unsat_and_raise_required(capsys):
    """Test 41 required bins: UNSAT by search, REJECT with raised lower bounds."""
    assert main(["solve", corpus("require_41_bins.loco")]) == ExitStatus.UNSAT
    assert "UNSAT" in capsys.readouterr().err
    assert main(["solve", corpus("require_41_bins.loco"), "--raise-required"]) == ExitStatus.REJECT
    assert "REJECT Bin: lb 41 > ub 40" in capsys.readouterr().err


def test_solve_fuel_exhausted(capsys):
    """Test a one-node budget."""
    assert main(["solve", corpus("small_bin_packing.loco"), "--fuel", "1"]) == ExitStatus.FUEL_EXHAUSTED
    err = capsys.readouterr().err
    assert "FUEL search budget of 1 nodes exhausted" in err
    assert err.splitlines()[-1].startswith("FUEL")


def test_oracle_lines(capsys):
    """Test the oracle listing for two ThingA and for a spec without generated kinds."""
    assert main(["oracle", corpus("two_thinga.loco"), "--cap", "4"]) == ExitStatus.OK
    assert capsys.readouterr().out.splitlines() == ["Bin: {1,2}", "(1)", "(2)"]
    assert main(["oracle", corpus("input_only.loco")]) == ExitStatus.OK
    assert capsys.readouterr().out.splitlines() == ["()"]


def test_oracle_cap_limits(capsys):
    """Test caps above the limit and below a generated upper bound."""
    assert main(["oracle", corpus("two_thinga.loco"), "--cap", "13"]) == ExitStatus.USAGE
    assert main(["oracle", corpus("two_thinga.loco"), "--cap", "1"]) == ExitStatus.USAGE
    assert "exceed cap 1" in capsys.readouterr().err


def test_usage_errors(capsys):
    """Test bad arguments and unreadable files."""
    with pytest.raises(SystemExit) as excinfo:
        main(["solve", corpus("bin_packing.loco"), "--max", "0"])
    assert excinfo.value.code == ExitStatus.USAGE
    assert main(["check", "missing.loco"]) == ExitStatus.USAGE
    assert "ERROR IO" in capsys.readouterr().err


def test_invalid_settings(monkeypatch, capsys):
    """Test an unusable environment value."""
    monkeypatch.setenv("LOCO_DEFAULT_FUEL", "abc")
    assert main(["check", corpus("bin_packing.loco")]) == ExitStatus.USAGE
    assert "LOCO_DEFAULT_FUEL" in capsys.readouterr().err


def test_bounds_of_input_only_spec(capsys):
    """Test that input kinds are listed with their fixed counts."""
    assert main(["bounds", corpus("input_only.loco")]) == ExitStatus.OK
    assert capsys.readouterr().out.splitlines() == ["Item [2, 2]"]


def test_oracle_on_rejected_spec(capsys):
    """Test an empty listing for a spec without models."""
    assert main(["oracle", corpus("conflict.loco"), "--cap", "12"]) == ExitStatus.OK
    assert capsys.readouterr().out == ""
