import json

import pytest

from freedyn.cli import golden_checks, main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


@pytest.fixture
def aut_file(tmp_path):
    def make(text):
        p = tmp_path / "aut.txt"
        p.write_text(text)
        return str(p)
    return make


def test_golden_checks_all_pass():
    bad = [(n, e, o) for n, e, o in golden_checks() if e != o]
    assert bad == []


def test_examples_command(capsys):
    code, out = run(capsys, "examples")
    assert code == 0
    assert out.strip().endswith("15/15 checks passed")


def test_verify(capsys, aut_file):
    code, out = run(capsys, "verify", "--aut", aut_file("rank 3\na -> cb\nb -> a\nc -> ba\n"))
    assert code == 0
    assert "b -> cB" in out and "c -> abC" in out


def test_verify_rejects(capsys, aut_file):
    code, out = run(capsys, "verify", "--aut", aut_file("rank 2\na -> ab\nb -> Ab\n"), "--format", "json")
    assert code == 1
    assert json.loads(out)["reason"] == "DeterminantObstruction"


def test_bad_input_exit_code(capsys, aut_file):
    code, _ = run(capsys, "verify", "--aut", aut_file("rank 2\na -> ab\n"))
    assert code == 2


def test_orbit(capsys):
    code, out = run(capsys, "orbit", "--example", "intro", "--word", "a")
    assert code == 0
    assert out.split() == ["a", "cb", "baa", "acbcb", "cbbaabaa", "baaacbcbacbcb"]


def test_omega_json(capsys):
    code, out = run(capsys, "omega", "--example", "double-limit", "--inverse", "--word", "baD", "--format", "json")
    assert code == 0
    data = json.loads(out)
    lim = data["rows"][0]["limit"]
    assert lim["points"] == ["b(A)^inf"] and lim["certificate"]["depth"] >= 32
    assert len(data["provenance"]["config_hash"]) == 16


def test_omega_inconclusive_strict(capsys):
    code, _ = run(capsys, "omega", "--example", "fibonacci", "--word", "a", "--nmax", "3", "--strict")
    assert code == 3


def test_census(capsys):
    code, out = run(capsys, "census", "--example", "flip", "--format", "json")
    assert code == 0
    assert json.loads(out)["periods"] == [1, 2]


def test_gamma_dot(capsys):
    code, out = run(capsys, "gamma", "--example", "fixed-a", "--ep", "(a)^inf", "--format", "dot")
    assert code == 0
    assert out.startswith("digraph")


def test_traintrack(capsys):
    code, out = run(capsys, "traintrack", "--example", "fibonacci", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["status"] == "train-track"
    assert data["nielsen_paths"] == []


def test_pf_matrix(capsys):
    code, out = run(capsys, "pf", "--matrix", "1,1;1,0", "--format", "json")
    assert code == 0
    assert float(json.loads(out)["width"]) <= 1e-9


def test_lengths(capsys, tmp_path):
    seeds = tmp_path / "seeds.txt"
    seeds.write_text("a\nab\nabAB\n")
    code, out = run(capsys, "lengths", "--example", "fibonacci", "--seeds", str(seeds), "--format", "json")
    assert code == 0
    vals = [r["value"] for r in json.loads(out)["rows"]]
    assert vals == pytest.approx([0.6180339887, 1.0, 0.0], abs=1e-9)


def test_output_independent_of_workers(capsys, tmp_path):
    seeds = tmp_path / "seeds.txt"
    seeds.write_text("(a)^inf\n(c)^inf\n(ac)^inf\n")
    outs = []
    for w in ("1", "2"):
        code, out = run(capsys, "census", "--example", "perm-2-3", "--seeds", str(seeds), "--workers", w)
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
