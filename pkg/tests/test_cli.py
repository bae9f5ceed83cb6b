import json
import os
from pathlib import Path

import pytest

from splitflow.cli import main
from splitflow.modes import circle_spectrum, spectrum_to_json


def run(args):
    return main(args)


def test_split_ramp(tmp_path):
    out = tmp_path / "o"
    assert run(["split", "--family", "ramp", "--seed", "7", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["status"] == "ok"
    assert rep["report"]["residual"] == 0
    assert rep["report"]["sf_total"] == 2


def test_missing_seed_is_usage_error(tmp_path, capsys):
    out = tmp_path / "none"
    assert run(["split", "--family", "ramp", "--out", str(out)]) == 2
    assert not out.exists()  # no partial artifacts
    assert "seed" in capsys.readouterr().err


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "split", "seed": 1, "bogus": True}))
    assert run(["--config", str(cfg)]) == 2


def test_command_mismatch_rejected(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "split", "seed": 1}))
    assert run(["maslov", "--config", str(cfg)]) == 2


def test_config_file_drives_command(tmp_path):
    out = tmp_path / "o"
    cfg = tmp_path / "c.json"
    cfg.write_text(
        json.dumps({
            "command": "maslov",
            "seed": 5,
            "count": 2,
            "loops": 1,
            "dim": 4,
            "out": str(out),
        })
    )
    assert run(["--config", str(cfg)]) == 0
    rows = (out / "maslov.csv").read_text().strip().splitlines()
    assert len(rows) == 4  # header + 3 instances
    assert rows[0].startswith("instance,seed,dim,loop")


def test_sweep_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["sweep", "--task", "split", "--count", "2", "--seed", "3"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert (a / "summary.csv").read_bytes() == (b / "summary.csv").read_bytes()
    rep = json.loads((a / "report.json").read_text())
    assert rep["status"] == "ok"
    assert all(r["residual"] == 0 for r in rep["instances"])


def test_aps_compare_with_spectrum_file(tmp_path):
    spec_file = tmp_path / "circle_k64.json"
    spec_file.write_text(spectrum_to_json(circle_spectrum(64)))
    out = tmp_path / "o"
    assert run([
        "aps-compare", "--spectrum", str(spec_file), "--sweep", "16,32,64",
        "--out", str(out),
    ]) == 0
    rows = (out / "decay.csv").read_text().strip().splitlines()
    assert rows[0] == "K,j,singular_value"
    rep = json.loads((out / "report.json").read_text())
    assert rep["stabilization"]["counts_constant"]
    assert all(r["rank"] <= r["bound"] for r in rep["finite_rank_pair"]["rows"])


def test_aps_compare_sweep_bound_checked(tmp_path):
    spec_file = tmp_path / "s.json"
    spec_file.write_text(spectrum_to_json(circle_spectrum(16)))
    assert run([
        "aps-compare", "--spectrum", str(spec_file), "--sweep", "16,32",
        "--out", str(tmp_path / "o"),
    ]) == 2


def test_reduce_command(tmp_path):
    out = tmp_path / "o"
    assert run([
        "reduce", "--seed", "2", "--count", "2", "--truncation", "16",
        "--out", str(out),
    ]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert all(i["agree"] for i in rep["instances"])


def test_asymmetry_command(tmp_path):
    out = tmp_path / "o"
    assert run([
        "asymmetry", "--family", "mirror", "--seed", "1", "--out", str(out),
    ]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["report"]["symmetric"] is True
    assert rep["report"]["value"] == 0


def test_convention_flag_threads_through(tmp_path):
    out = tmp_path / "o"
    assert run([
        "split", "--family", "ramp", "--seed", "1", "--convention", "rclo",
        "--out", str(out),
    ]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["convention"] == "rclo"
    assert rep["report"]["residual"] == 0
