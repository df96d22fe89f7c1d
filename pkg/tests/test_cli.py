import subprocess
import sys

import pytest

from quadlat.cli import main
from quadlat.lattice import diagonal_lattice, identity_lattice, write_gram


@pytest.fixture
def grams(tmp_path):
    paths = {}
    for name, L in [("i3", identity_lattice(3)), ("d5", diagonal_lattice([5])), ("d7", diagonal_lattice([7])),
                    ("i5", identity_lattice(5))]:
        paths[name] = str(tmp_path / f"{name}.gram")
        write_gram(L, paths[name])
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_disc_and_min(capsys, grams):
    assert run(capsys, "disc", grams["i3"])[1] == "8\n"
    assert run(capsys, "min", grams["d5"])[1] == "5\n"


def test_local_rep(capsys, grams):
    code, out, _ = run(capsys, "local-rep", grams["d7"], grams["i3"], "-p", "2")
    assert code == 0 and out == "2 false\n"
    code, out, _ = run(capsys, "local-rep", grams["d5"], grams["i3"])
    assert out.splitlines()[-1] == "all true"


def test_represent(capsys, grams):
    assert run(capsys, "represent", grams["d5"], grams["i3"])[1] == "24\n"
    assert run(capsys, "represent", grams["d5"], grams["i3"], "--primitive")[1] == "24\n"


def test_genus_roundtrip(capsys, grams, tmp_path):
    code, out, _ = run(capsys, "genus", grams["i5"], "--out", str(tmp_path / "g"))
    assert code == 0 and out.startswith("classes 1\n")
    code, out, _ = run(capsys, "spinor-genus", str(tmp_path / "g"))
    assert code == 0 and out == "0 0\n"


def test_gauss_check_csv(capsys):
    code, out, err = run(capsys, "gauss-check", "--dmax", "30")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "d,count,12h,pass"
    assert lines[1] == "5,24,24,true"
    assert "d=1 exception" in err


def test_local_global_csv(capsys, grams, tmp_path):
    out_csv = tmp_path / "rep.csv"
    code, _, err = run(capsys, "local-global", grams["i5"], "--m", "1", "--bound", "30", "--csv", str(out_csv))
    assert code == 0 and "red_flags 0" in err
    text = out_csv.read_text()
    assert text.startswith("candidate_id,disc,minimum,locally_representable,per_class_counts,all_classes_represented,good_flags\n")
    code, out, _ = run(capsys, "local-global", grams["i5"], "--m", "1", "--bound", "30")
    assert out == text


def test_usage_errors(capsys, grams, tmp_path):
    assert run(capsys, "nope")[0] == 1
    assert run(capsys, "disc", str(tmp_path / "missing.gram"))[0] == 1
    bad = tmp_path / "bad.gram"
    bad.write_text("2\n1 2\n")
    assert run(capsys, "disc", str(bad))[0] == 1


def test_budget_env(grams):
    env = {"QUADLAT_BUDGET": "1", "PATH": ""}
    res = subprocess.run([sys.executable, "-m", "quadlat.cli", "represent", grams["i3"], grams["i5"]],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 1 and "budget" in res.stderr
