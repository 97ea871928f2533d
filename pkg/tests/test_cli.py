import json
import subprocess
import sys

import numpy as np
import pytest

from multinorm.cli import main
from multinorm.instances import (
    SchemaError, builtin_corpus, dumps, load_instance, parse_instance, validate, write_corpus,
)


def _write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


@pytest.fixture
def face(tmp_path):
    doc = next(d for d in builtin_corpus() if d["name"] == "linf_ball_face")
    return _write(tmp_path, "face.json", doc)


@pytest.fixture
def pair(tmp_path):
    doc = next(d for d in builtin_corpus() if d["name"] == "l1_ball_corner_pair")
    return _write(tmp_path, "pair.json", doc)


def test_corpus_documents_validate():
    for doc in builtin_corpus():
        validate(doc)
        inst = parse_instance(doc)
        assert inst.family.increasing_certified
        assert parse_instance(inst.to_json()).family.specs == inst.family.specs


def test_schema_errors():
    good = builtin_corpus()[0]
    for bad in ({**good, "extra": 1}, {**good, "x": "nope"},
                {**good, "set": {"kind": "ball", "norm": {"kind": "lp", "p": 0.5},
                                 "center": [0, 0], "radius": 1}},
                {**good, "x": [1, 2, 3]}):
        with pytest.raises(SchemaError):
            parse_instance(bad)


def test_project_face(face, capsys):
    assert main(["project", "--instance", face]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["distance"] == pytest.approx(1, abs=1e-6)
    assert out["unique"] == "no"
    assert {round(w[0], 9) for w in out["witnesses"]} == {1.0}


def test_project_csv_to_file(face, tmp_path):
    out = tmp_path / "w.csv"
    assert main(["project", "--instance", face, "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "x1,x2,objective"
    assert len(lines) > 100


def test_common_and_chain(pair, capsys):
    assert main(["common", "--instance", pair]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["distance"] == pytest.approx(1 + 2 ** -0.5, abs=1e-6)
    cw = np.array(out["common_witnesses"])
    assert len(cw) and np.abs(cw - 0.5).max() <= 1e-6
    assert main(["chain", "--instance", pair, "--uc-index", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["uniqueness"]["verdict"] == "yes" and out["nested"]


def test_modulus(tmp_path, capsys):
    path = _write(tmp_path, "m.json", {"norm": {"kind": "lp", "p": 1}, "dim": 2,
                                       "eps_grid": [0.5, 1.0], "samples": 5000,
                                       "threshold": 1e-3})
    out = tmp_path / "m.out.json"
    assert main(["modulus", "--instance", path, "--out", str(out)]) == 0
    assert "not_uc_evidence" in capsys.readouterr().out
    est = json.loads(out.read_text())
    assert est["verdict"] == "not_uc_evidence" and len(est["witness_pairs"]) == 2


def test_exit_code_precondition(face, tmp_path):
    doc = json.loads(open(face).read())
    doc["x"] = [0.0, 0.0]
    assert main(["project", "--instance", _write(tmp_path, "in.json", doc)]) == 3
    doc = json.loads(open(face).read())
    doc["family"] = {"norms": [{"kind": "lp", "p": 1}, {"kind": "lp", "p": 2}]}
    assert main(["chain", "--instance", _write(tmp_path, "unordered.json", doc)]) == 3
    assert main(["common", "--instance", face]) == 3


def test_exit_code_budget(face, monkeypatch):
    monkeypatch.setenv("MULTINORM_POINT_BUDGET", "50")
    assert main(["project", "--instance", face]) == 3


def test_exit_code_schema(tmp_path):
    assert main(["project", "--instance", _write(tmp_path, "bad.json", {"set": 1})]) == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["project", "--instance", str(broken)]) == 2
    assert main(["project", "--instance", str(tmp_path / "missing.json")]) == 2
    assert main(["project"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["project", "--eps", "-1"])
    assert info.value.code == 2


def test_verify_mismatch_exit_code(face, tmp_path, monkeypatch, capsys):
    import multinorm.cli as cli
    real = cli.nearest_point_set

    def shifted(*args, **kwargs):
        res = real(*args, **kwargs)
        res.distance += 0.5
        return res

    monkeypatch.setattr(cli, "nearest_point_set", shifted)
    assert main(["verify", "--instance", face]) == 4
    report = json.loads(capsys.readouterr().out)
    assert report["results"][0]["agreement"] == "distance_mismatch"


def test_verify_single_file_csv(pair, capsys):
    assert main(["verify", "--instance", pair, "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("instance,norm,agreement")
    assert all(",match," in line for line in lines[1:])


def test_corpus_roundtrip(tmp_path):
    paths = write_corpus(tmp_path)
    assert len(paths) == 7
    for p in paths:
        assert dumps(load_instance(p).to_json()) == p.read_text()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "multinorm", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
