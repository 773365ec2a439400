from __future__ import annotations

import json

import pytest

from molforge.cli import main, toy_dir
from molforge.smiles import canonicalize


def test_canon_arguments(capsys):
    assert main(["canon", "OCC", "c1ccccc1"]) == 0
    out = capsys.readouterr().out.split()
    assert out == [canonicalize("CCO"), canonicalize("c1ccccc1")]


def test_canon_bad_input_exit_code(capsys):
    assert main(["canon", "CCO", "C1CC"]) == 1
    assert capsys.readouterr().out.strip() == canonicalize("CCO")


def test_descriptors_and_filter(tmp_path):
    lib = tmp_path / "lib.smi"
    lib.write_text("CCO\tethanol\nO=[N+]([O-])c1ccccc1\tnitro\n", encoding="utf-8")
    table = tmp_path / "d.csv"
    assert main(["descriptors", "--in", str(lib), "--out", str(table)]) == 0
    lines = table.read_text().splitlines()
    assert lines[0].startswith("id,smiles,") and len(lines) == 3
    kept, report = tmp_path / "kept.smi", tmp_path / "report.json"
    assert main(["filter", "--in", str(lib), "--out", str(kept), "--report", str(report)]) == 0
    assert kept.read_text().split("\t")[1].strip() == "ethanol"
    data = json.loads(report.read_text())
    assert data["attrition"]["total"] == 2 and data["attrition"]["retained"] == 1


def test_novelty_and_calibrate(tmp_path):
    gen = tmp_path / "gen.smi"
    gen.write_text("c1ccc2ccccc2c1\tg1\nCc1ccccc1\tg2\n", encoding="utf-8")
    out = tmp_path / "nov.json"
    assert main(["novelty", "--generated", str(gen), "--benchmark", str(toy_dir() / "benchmark.csv"), "--out", str(out)]) == 0
    assert "novelty_pct" in json.loads(out.read_text())
    out = tmp_path / "cal.json"
    base = toy_dir()
    assert main(["calibrate", "--benchmark", str(base / "benchmark.csv"), "--scores", str(base / "scores.csv"),
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["n_scored"] > 0


def test_generate(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"seed_smiles": "CCCCOc1ccccc1", "primitive": "fragment_mask",
                                "primitive_args": {"atoms": [0]}, "decode_params": {"beam_width": 4}}))
    out = tmp_path / "gen.smi"
    assert main(["generate", "--spec", str(spec), "--out", str(out)]) == 0
    rows = [l.split("\t") for l in out.read_text().splitlines()]
    assert rows and all(len(r) == 3 for r in rows)


@pytest.mark.parametrize("content", ["{not json", json.dumps({"primitive": "fragment_mask"})])
def test_generate_bad_spec_is_config_error(tmp_path, content):
    spec = tmp_path / "spec.json"
    spec.write_text(content)
    assert main(["generate", "--spec", str(spec)]) == 2


def test_config_and_io_exit_codes(tmp_path):
    bad = tmp_path / "policy.json"
    bad.write_text(json.dumps({"thresholds": {"mw_max": "heavy"}}))
    lib = tmp_path / "lib.smi"
    lib.write_text("CCO\n")
    assert main(["filter", "--policy", str(bad), "--in", str(lib), "--out", str(tmp_path / "o.smi")]) == 2
    assert main(["descriptors", "--in", str(tmp_path / "missing.smi")]) == 3
    assert main(["campaign", "--out", str(tmp_path / "x")]) == 2


def test_campaign_toy(tmp_path):
    out = tmp_path / "toy"
    assert main(["campaign", "--toy", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["molecules"] > 0 and summary["failed_series"] == 0
