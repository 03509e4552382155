from __future__ import annotations

import json

import pytest

from qss import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def qutrit_file(tmp_path, capsys):
    path = tmp_path / "t23.json"
    assert run(capsys, "threshold", "--k", "2", "--n", "3", "--out", str(path))[0] == 0
    return path


def test_threshold_verify(capsys):
    code, out, _ = run(capsys, "threshold", "--k", "2", "--n", "3", "--verify")
    assert code == 0 and '"verdict": "PASS"' in out


def test_encode_reconstruct_roundtrip(tmp_path, capsys, qutrit_file):
    enc = tmp_path / "enc.json"
    assert run(capsys, "encode", "--in", str(qutrit_file), "--seed", "3", "--out", str(enc))[0] == 0
    code, out, _ = run(capsys, "reconstruct", "--in", str(enc), "--set", "AC")
    assert code == 0
    assert json.loads(out)["fidelity"] > 1 - 1e-9


def test_reconstruct_unauthorized(tmp_path, capsys, qutrit_file):
    enc = tmp_path / "enc.json"
    run(capsys, "encode", "--in", str(qutrit_file), "--secret", "1", "--out", str(enc))
    code, _, err = run(capsys, "reconstruct", "--in", str(enc), "--set", "B")
    assert code == 3 and "error" in err


def test_rejections(capsys):
    code, _, err = run(capsys, "threshold", "--k", "1", "--n", "2")
    assert code == 2 and "no-cloning" in err
    code, _, err = run(capsys, "hybrid", "--k", "2", "--n", "3")
    assert code == 2 and "n <= 2k-2" in err
    code, _, err = run(capsys, "general", "--structure", "ABC,AD,BC")
    assert code == 2 and "complement AD is already authorized" in err


def test_general_trivial(capsys):
    code, out, _ = run(capsys, "general", "--structure", "ABC,AD", "--completion", "trivial", "--p", "5", "--verify")
    assert code == 0 and '"verdict": "PASS"' in out


def test_corrupted_descriptor_fails_verify(tmp_path, capsys, qutrit_file):
    data = json.loads(qutrit_file.read_text())
    data["tree"]["alphas"] = [0, 1, 1]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", "--in", str(bad))
    assert code == 1 and '"verdict": "FAIL"' in out


def test_malformed_json_reports_location(tmp_path, capsys):
    bad = tmp_path / "broken.json"
    bad.write_text('{"format": "qss/1",\n  "kind": }')
    code, _, err = run(capsys, "verify", "--in", str(bad))
    assert code == 3 and "broken.json:2:" in err


def test_hybrid_encode_reconstruct_audit(tmp_path, capsys):
    desc = tmp_path / "h.json"
    code, _, err = run(capsys, "hybrid", "--k", "3", "--n", "4", "--out", str(desc))
    assert code == 0 and "X^3" in err
    enc = tmp_path / "enc.json"
    assert run(capsys, "encode", "--in", str(desc), "--a", "2", "--b", "4", "--out", str(enc))[0] == 0
    code, out, _ = run(capsys, "reconstruct", "--in", str(enc), "--set", "ABD")
    assert code == 0 and json.loads(out) == {"a": 2, "b": 4}
    code, out, _ = run(capsys, "audit", "--in", str(desc))
    assert code == 0 and json.loads(out)["ok"]


def test_bad_arguments(capsys, qutrit_file):
    assert run(capsys, "verify", "--in", str(qutrit_file), "--tolerance", "-1")[0] == 3
    assert run(capsys, "encode", "--in", str(qutrit_file), "--secret", "7")[0] == 3
    assert run(capsys, "verify", "--in", "/nonexistent/x.json")[0] == 3
