import json
import os
import subprocess
import sys

import pytest

from wienerhopf import io
from wienerhopf.cli import main

from conftest import identity, one_plus_z, scalar_z, two_plus_z


def write(tmp_path, r, name="p.json"):
    path = tmp_path / name
    io.save_realization(r, path)
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestIndices:
    def test_z_json(self, tmp_path, capsys):
        code, out, _ = run(["indices", "--json", write(tmp_path, scalar_z())], capsys)
        doc = json.loads(out)
        assert code == 0
        assert (doc["negatives"], doc["zeros"], doc["positives"], doc["winding"]) == ([], 0, [1], 1)
        assert {"flags", "residuals"} <= set(doc)

    def test_human(self, tmp_path, capsys):
        code, out, _ = run(["indices", write(tmp_path, two_plus_z())], capsys)
        assert code == 0 and "zeros      1" in out

    def test_malformed(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run(["indices", str(path)], capsys)
        assert code == 2 and "line 1" in err

    def test_unstable(self, tmp_path, capsys):
        path = tmp_path / "u.json"
        path.write_text(json.dumps({"m": 1, "R0": [[[1, 0]]], "plus": {"A": [[[1, 0]]], "B": [[[1, 0]]], "C": [[[1, 0]]]}}))
        code, _, err = run(["indices", str(path)], capsys)
        assert code == 2 and "UnstableStateMatrix" in err

    def test_circle_zero(self, tmp_path, capsys):
        code, _, err = run(["indices", write(tmp_path, one_plus_z())], capsys)
        assert code == 3 and "solve_dare" in err

    def test_bad_tolerance(self, tmp_path, capsys):
        code, _, _ = run(["indices", "--tol", "0.5", write(tmp_path, scalar_z())], capsys)
        assert code == 2

    def test_batch_directory(self, tmp_path, capsys):
        run(["generate", "--m", "2", "--indices", "-1,1", "--seed", "3", "--out", str(tmp_path)], capsys)
        io.save_realization(scalar_z(), tmp_path / "z.json")
        code, out, _ = run(["indices", "--json", "--jobs", "2", str(tmp_path)], capsys)
        docs = [json.loads(line) for line in out.splitlines()]
        assert code == 0 and len(docs) == 2
        assert {tuple(d["positives"]) for d in docs} == {(1,)}


class TestGenerate:
    def test_round_trip(self, tmp_path, capsys):
        out = tmp_path / "g"
        code, _, _ = run(["generate", "--m", "3", "--indices", "-1,0,2", "--seed", "42", "--out", str(out)], capsys)
        assert code == 0
        truth = json.loads((out / "truth.json").read_text())
        assert truth["indices"] == [-1, 0, 2]
        _, doc, _ = run(["indices", "--json", str(out / "problem.json")], capsys)
        doc = json.loads(doc)
        assert (doc["negatives"], doc["zeros"], doc["positives"]) == (truth["negatives"], truth["zeros"], truth["positives"])
        first = (out / "problem.json").read_bytes()
        run(["generate", "--m", "3", "--indices", "-1,0,2", "--seed", "42", "--out", str(out)], capsys)
        assert (out / "problem.json").read_bytes() == first

    def test_constant(self, tmp_path, capsys):
        code, _, _ = run(
            ["generate", "--m", "2", "--indices", "0,0", "--state-plus", "0", "--state-minus", "0", "--out", str(tmp_path)],
            capsys,
        )
        r = io.load_realization(tmp_path / "problem.json")
        assert code == 0 and r.n_plus == r.n_minus == 0

    def test_arity(self, tmp_path, capsys):
        code, _, _ = run(["generate", "--m", "2", "--indices", "1", "--out", str(tmp_path)], capsys)
        assert code == 2

    def test_bad_indices(self, tmp_path, capsys):
        code, _, _ = run(["generate", "--m", "1", "--indices", "x", "--out", str(tmp_path)], capsys)
        assert code == 2


class TestFactor:
    def test_two_plus_z(self, tmp_path, capsys):
        code, _, _ = run(["factor", write(tmp_path, two_plus_z()), "--out", str(tmp_path / "f")], capsys)
        assert code == 0
        psi = json.loads((tmp_path / "f" / "psi.json").read_text())
        assert psi["D"] == [[[2.0, 0.0]]] and psi["C0"] == [[[2.0, 0.0]]]
        xi = io.realization_from_dict(json.loads((tmp_path / "f" / "xi.json").read_text())["realization"])
        assert xi.n_plus == xi.n_minus == 0 and abs(xi.R0[0, 0] - 1) < 1e-12
        for name in ("psi", "xi", "v", "w", "x"):
            assert "residuals" in json.loads((tmp_path / "f" / f"{name}.json").read_text())

    def test_identity(self, tmp_path, capsys):
        code, _, _ = run(["factor", write(tmp_path, identity(2)), "--out", str(tmp_path / "f")], capsys)
        v = io.bi_inner_from_dict(json.loads((tmp_path / "f" / "v.json").read_text()))
        assert code == 0 and v.n == 0

    @pytest.mark.skipif(os.geteuid() == 0, reason="root can write anywhere")
    def test_unwritable(self, tmp_path, capsys):
        locked = tmp_path / "locked"
        locked.mkdir(mode=0o500)
        code, _, _ = run(["factor", write(tmp_path, scalar_z()), "--out", str(locked / "f")], capsys)
        assert code == 2

    def test_out_is_a_file(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code, _, _ = run(["factor", write(tmp_path, scalar_z()), "--out", str(blocker / "f")], capsys)
        assert code == 2


class TestVerify:
    def test_generated_passes(self, tmp_path, capsys):
        run(["generate", "--m", "3", "--indices", "-1,0,2", "--seed", "42", "--out", str(tmp_path)], capsys)
        code, out, _ = run(["verify", str(tmp_path / "problem.json")], capsys)
        assert code == 0 and "overall: PASS" in out

    def test_corrupted_coupling(self, tmp_path, capsys):
        run(["generate", "--m", "3", "--indices", "-1,0,2", "--seed", "42", "--out", str(tmp_path)], capsys)
        problem = str(tmp_path / "problem.json")
        run(["factor", problem, "--out", str(tmp_path / "f")], capsys)
        assert run(["verify", problem, "--factors", str(tmp_path / "f")], capsys)[0] == 0
        xpath = tmp_path / "f" / "x.json"
        doc = json.loads(xpath.read_text())
        doc["X"][0][0][0] += 0.1
        xpath.write_text(json.dumps(doc))
        code, out, _ = run(["verify", "--json", problem, "--factors", str(tmp_path / "f")], capsys)
        doc = json.loads(out)
        assert code == 3 and not doc["pass"]
        failed = {c["name"] for c in doc["checks"] if not c["passed"]}
        assert "stored X vs recomputed" in failed

    def test_identity_vacuous(self, tmp_path, capsys):
        code, out, _ = run(["verify", write(tmp_path, identity(2))], capsys)
        assert code == 0


def test_winding(tmp_path, capsys):
    code, out, _ = run(["winding", write(tmp_path, scalar_z())], capsys)
    assert code == 0 and out.strip() == "1"


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "wienerhopf", "winding", "--json", write(tmp_path, scalar_z())],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout) == {"winding": 1}
