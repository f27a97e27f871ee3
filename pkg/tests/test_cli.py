import io
import json
import subprocess
import sys

import pytest

from energy_space.cli import parse_window, run


def call(*argv):
    out = io.StringIO()
    rc = run(list(argv), out)
    return rc, out.getvalue()


def report(*argv):
    rc, text = call(*argv)
    assert rc == 0
    return json.loads(text)


def test_gram():
    r = report("gram", "--graph", "zchain", "--window", "1,2,3")
    assert r["matrix"] == [[1, 1, 1], [1, 2, 2], [1, 2, 3]]
    assert r["schema"] == "energy-space/1"
    assert "paper_anchor" in r


def test_dipole():
    r = report("dipole", "--graph", "zchain", "--vertex", "3", "--section", "10")
    assert r["values"]["5"] == pytest.approx(3.0)
    assert r["values"]["-4"] == pytest.approx(0.0, abs=1e-12)


def test_reconstruct():
    r = report("reconstruct", "--graph", "star:5", "--vertex", "0")
    assert r["residual"] <= 1e-9


def test_monopole():
    r = report("monopole", "--graph", "zchain", "--vertex", "0", "--filtration", "box:10")
    assert [lv["energy"] for lv in r["levels"]] == pytest.approx([(k + 1) / 2 for k in range(1, 11)])


def test_dual_roundtrip(tmp_path):
    r = report("dual", "--graph", "complete:3")
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"window": r["window"], "entries": r["dirac_gram"]}))
    back = report("dual", "--gram-file", str(p))
    assert len(back["edges"]) == 3


def test_harmonic():
    r = report("harmonic", "--graph", "geom:2", "--filtration", "box:30")
    assert r["candidates"][0]["energy"] == pytest.approx(3.0, abs=1e-6)
    r = report("harmonic", "--graph", "zchain", "--filtration", "box:10")
    assert r["candidates"] == []


def test_indicator():
    r = report("indicator", "--graph", "zd:2", "--filtration", "box:4")
    assert [lv["energy"] for lv in r["levels"]] == [4 * (2 * k + 1) for k in range(1, 5)]


def test_csv():
    rc, text = call("monopole", "--graph", "zchain", "--vertex", "0", "--filtration", "box:5", "--format", "csv")
    assert rc == 0
    lines = text.strip().splitlines()
    assert lines[0].split(",")[0] == "level"
    assert len(lines) > 5


@pytest.mark.parametrize(
    "argv",
    [
        ("gaussian-check", "--graph", "zchain", "--window", "1,2,3", "--samples", "20000", "--seed", "7"),
        ("deficiency", "--graph", "zchain", "--lambda", "-1"),
        ("lattice", "--vertex", "0"),
        ("boundary", "--graph", "zchain", "--filtration", "box:6"),
    ],
)
def test_deterministic(argv):
    assert call(*argv) == call(*argv)


def test_seed_changes_output():
    base = ("gaussian-check", "--graph", "zchain", "--window", "1,2", "--samples", "4000")
    assert call(*base, "--seed", "1")[1] != call(*base, "--seed", "2")[1]


def test_subprocess_byte_identical():
    cmd = [sys.executable, "-m", "energy_space.cli", "gaussian-check", "--graph", "zchain", "--window", "1,2",
           "--samples", "4000", "--seed", "3"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a


@pytest.mark.parametrize(
    "argv",
    [
        ("dipole", "--graph", "zchain", "--vertex", "0"),
        ("dipole", "--graph", "nosuch", "--vertex", "1"),
        ("deficiency", "--graph", "zchain", "--lambda", "1"),
        ("reconstruct", "--graph", "zchain", "--vertex", "3", "--section", "2"),
    ],
)
def test_validation_exit(argv, capsys):
    rc, text = call(*argv)
    assert rc == 2 and text == ""
    assert "error" in capsys.readouterr().err


def test_usage_exit():
    with pytest.raises(SystemExit) as e:
        run(["nosuch"], io.StringIO())
    assert e.value.code == 2


def test_parse_window():
    assert parse_window("1, 2,3") == [1, 2, 3]
    assert parse_window("1,0;0,1") == [(1, 0), (0, 1)]
    assert parse_window(None) == []
