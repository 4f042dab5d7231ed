"""The viewnet command line."""

import os
import subprocess
import sys

import pytest

from conftest import corpus
from viewnet.cli import run


def out_of(capsys, *argv):
    code = run(list(argv))
    got = capsys.readouterr()
    return code, got.out, got.err


def test_consistent_exit_zero_and_witness(capsys, tmp_path):
    w = str(tmp_path / "w")
    code, out, _ = out_of(capsys, "check", corpus("atm", "atm.dol"), "--network", "N", "--witness", w)
    assert code == 0
    assert out.startswith("network N: CONSISTENT")
    assert os.path.isfile(os.path.join(w, "trace.txt"))
    code, out, _ = out_of(capsys, "witness", w)
    assert code == 0
    events = out.split("== events\n")[1].splitlines()
    assert [e.split(" : ")[1].split("(")[0] for e in events] == ["insertCard", "enterPIN", "verify", "verified", "ejectCard"]
    code, out, _ = out_of(capsys, "check", corpus("atm"), "--network", "N", "--strategy", "decentralized", "--witnesses", w)
    assert code == 0


def test_output_is_byte_identical(capsys):
    args = ("check", corpus("atm", "atm.dol"), "--network", "N", "--format", "structured")
    first = out_of(capsys, *args)
    assert first == out_of(capsys, *args)
    assert '"verdict": "CONSISTENT"' in first[1]
    assert "wall_time" not in first[1]


def test_inconsistent_exit_one(capsys):
    code, out, _ = out_of(capsys, "check", corpus("pairwise"), "--network", "N")
    assert code == 1 and "INCONSISTENT" in out


def test_unknown_exit_two(capsys):
    code, out, _ = out_of(capsys, "check", corpus("atm_mutant"), "--network", "N", "--max-states", "50")
    assert code == 2 and "UNKNOWN" in out


def test_all_networks_take_the_worst_verdict(capsys):
    code, out, _ = out_of(capsys, "check", corpus("pairwise"), "--all")
    assert code == 1
    assert out.count("network ") == 4


@pytest.mark.parametrize(
    "argv",
    [
        ("check", "nowhere.dol", "--network", "N"),
        ("check", corpus("atm"), "--network", "Nope"),
        ("check", corpus("atm"), "--network", "N", "--depth", "0"),
        ("check", corpus("atm"), "--network", "N", "--strategy", "decentralized"),
        ("check", corpus("atm")),
        ("frobnicate",),
    ],
)
def test_errors_exit_three(capsys, argv):
    code, _, err = out_of(capsys, *argv)
    assert code == 3
    assert err


def test_parse_error_reports_location(capsys, tmp_path):
    bad = tmp_path / "bad.dol"
    bad.write_text("network N =\n  A,\nend\n")
    code, _, err = out_of(capsys, "parse", str(bad))
    assert code == 3
    assert "bad.dol:3" in err


def test_parse_views(capsys):
    code, out, _ = out_of(capsys, "parse", corpus("atm", "User_Interface.cd"), corpus("atm", "atm.dol"))
    assert code == 0
    assert out.splitlines()[0].endswith("ok, ClassDiagram User_Interface")
    assert "ok, 7 declarations" in out.splitlines()[1]


def test_graph_is_deterministic(capsys, tmp_path):
    code, a, _ = out_of(capsys, "graph", corpus("atm"))
    assert code == 0 and a.startswith("digraph")
    out = tmp_path / "g.dot"
    assert run(["graph", corpus("atm"), "--out", str(out)]) == 0
    assert out.read_text() == a


def test_console_entry_point():
    p = subprocess.run([sys.executable, "-m", "viewnet", "version"], capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout.startswith("viewnet ")
