import json
import subprocess
import sys
from fractions import Fraction

import pytest

from sskit.cli import main
from sskit.dist import FiniteDistribution, save_distribution
from sskit.machine import ISA_HASH

F = Fraction


@pytest.fixture
def uniform2(tmp_path):
    path = tmp_path / "u2.dist"
    save_distribution(FiniteDistribution.uniform(2), path)
    return str(path)


def test_kraft_exit_zero(tmp_path):
    out = tmp_path / "kraft.json"
    assert main(["kraft", "--lmax", "16", "--out", str(out)]) == 0
    j = json.loads(out.read_text())
    assert j["pass"] and j["isa_hash"] == ISA_HASH and len(j["records"]) == 1


def test_report_to_stdout(capsys):
    assert main(["shannon-fano", "--width", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["suite"] == "shannon-fano"


def test_check_failure_exit_one(uniform2, capsys):
    assert main(["exclusion", "--dist", uniform2, "--k", "1"]) == 1
    err = capsys.readouterr().err
    assert "exclusion[zeros].excluded" in err and "FAIL" in err


@pytest.mark.parametrize("argv", [
    ["deficiency", "--dist", "/nonexistent.dist"],
    ["lemma-stor", "--trials", "0"],
    ["lemma-stor", "--k", "1", "--delta", "1/2"],
    ["lemma-rtos", "--searcher", "quantum:x", "--width", "1"],
    ["exclusion", "--program", "HOP"],
])
def test_bad_input_exit_two(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err.startswith("sskit: error:")


def test_unknown_suite_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["nope"])
    assert exc.value.code == 2


def test_malformed_distribution_exit_two(tmp_path):
    bad = tmp_path / "bad.dist"
    bad.write_text("m=1\n0 1/2\n1 1/3\n")
    assert main(["deficiency", "--dist", str(bad)]) == 2


def test_delta_rounds_down(tmp_path, uniform2):
    out = tmp_path / "r.json"
    assert main(["lemma-stor", "--dist", uniform2, "--delta", "0.3", "--trials", "50",
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["config"]["k"] == 2


def test_sweep_writes_csv(tmp_path):
    out = tmp_path / "sweep.json"
    assert main(["sweep", "--suite", "lemma-stor", "--axis", "k", "--values", "0,1",
                 "--width", "1", "--trials", "50", "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())) == 2
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("k,suite,pass") and len(lines) == 3


def test_k_command(capsys, uniform2):
    assert main(["k", "--target", "bits:1:0x0"]) == 0
    j = json.loads(capsys.readouterr().out)
    assert j["k"] == 8 and j["witness"] == "bits:8:0x25"
    assert main(["k", "--target", "0", "--cond", uniform2, "--k", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["k"] == 8


def test_member_command(capsys, tmp_path, uniform2):
    tup = tmp_path / "y.txt"
    tup.write_text(" ".join(["00"] * 9) + "\n")
    assert main(["member", "--tuple", str(tup), "--dist", uniform2, "--k", "1"]) == 0
    j = json.loads(capsys.readouterr().out)
    assert j["member"] is True and j["threshold"] == 16 and j["params"]["N"] == 9
    tup.write_text("00 01\n")
    assert main(["member", "--tuple", str(tup), "--dist", uniform2, "--k", "1"]) == 2


def test_reports_byte_identical_across_jobs(tmp_path, uniform2):
    paths = []
    for jobs in (1, 2):
        out = tmp_path / f"r{jobs}.json"
        main(["lemma-stor", "--dist", uniform2, "--trials", "80", "--jobs", str(jobs),
              "--out", str(out)])
        j = json.loads(out.read_text())
        del j["timing"]
        paths.append(json.dumps(j, sort_keys=True))
    assert paths[0] == paths[1]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sskit.cli", "kraft", "--lmax", "8"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["records"][0]["lhs"] == "67/128"
