import json
import os

import pytest

from balancelaw.harness.cli import main
from balancelaw.harness.manifest import normalized_command, verify_manifest


def run(tmp_path, name, *args):
    out = tmp_path / name
    code = main(list(args) + ["--out", str(out)])
    return code, out


def test_verify_broadwell_passes(tmp_path):
    code, out = run(tmp_path, "a", "verify", "--samples", "200")
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True
    assert verify_manifest(out) == []


def test_verify_mutant_fails(tmp_path):
    code, out = run(tmp_path, "a", "verify", "--mutate", "flip-source", "--samples", "100")
    assert code == 1
    report = json.loads((out / "report.json").read_text())
    failed = {c["name"] for c in report["checks"] if not c["passed"]}
    assert "source_factorization" in failed


def test_samples_and_seed_echoed(tmp_path):
    code, out = run(tmp_path, "a", "verify", "--samples", "10", "--seed", "7")
    report = json.loads((out / "report.json").read_text())
    assert report["sample"]["count"] == 10 and report["sample"]["seed"] == 7
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 7
    assert manifest["command"][-2:] == ["--out", "<out>"]


def test_usage_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"model": {"family": "navier"}, "task": "verify"}')
    assert main(["verify", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "model.family" in capsys.readouterr().err
    bad.write_text('{"model": {"family": "broadwell"}, "task": "sweep"}')
    assert main(["verify", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["verify", "--config", str(tmp_path / "missing.json")]) == 2
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_runtime_failure_exit_code(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"family": "broadwell"}, "task": "simulate",
                               "solver": {"ic": {"kind": "gaussian", "amplitude": -5.0}}}))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["verify", "--samples", "10", "--out", str(blocker / "sub")]) == 3


def test_simulate_outputs(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"family": "broadwell"}, "task": "simulate",
                               "solver": {"cells": 200, "eps": 0.1, "t_final": 0.5}}))
    code, out = run(tmp_path, "a", "simulate", "--config", str(cfg))
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["entropy_nonincreasing"] and summary["conservation_ok"]
    names = set(json.loads((out / "manifest.json").read_text())["files"])
    assert names == {"trajectory.csv", "entropy.csv", "summary.json", "config.json"}
    assert verify_manifest(out) == []


def test_maxwellian_outputs(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"family": "euler_damping"}, "task": "maxwellian",
                               "maxwellian": {"states": [[1.0, 2.0], [0.7, -0.1]]}}))
    code, out = run(tmp_path, "a", "maxwellian", "--config", str(cfg))
    assert code == 0
    rows = json.loads((out / "maxwellian.json").read_text())["results"]
    assert rows[0]["maxwellian"] == [1.0, 0.0] and rows[0]["status"] == "converged"


def test_reproducible_outputs(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"model": {"family": "broadwell"}, "task": "sweep",
                               "solver": {"cells": 100},
                               "sweep": {"eps": [0.1, 0.05, 0.025]}}))
    _, a = run(tmp_path, "a", "sweep", "--config", str(cfg))
    _, b = run(tmp_path, "b", "sweep", "--config", str(cfg), "--workers", "3")
    for name in ("sweep.csv", "sweep_summary.json", "config.json", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_manifest_detects_tampering(tmp_path):
    _, out = run(tmp_path, "a", "verify", "--samples", "10")
    with open(out / "report.json", "a") as fh:
        fh.write(" ")
    assert verify_manifest(out) == ["report.json"]
    assert not any(n.startswith(".tmp-") for n in os.listdir(out))


def test_normalized_command():
    assert normalized_command(["sweep", "--out", "/x/y", "--seed", "1"]) == \
        ["sweep", "--out", "<out>", "--seed", "1"]
    assert normalized_command(["verify", "--out=/tmp/z"]) == ["verify", "--out=<out>"]


def test_workers_not_recorded():
    assert normalized_command(["sweep", "--workers", "4", "--out", "o"]) == ["sweep", "--out", "<out>"]
    assert normalized_command(["sweep", "--workers=2"]) == ["sweep"]


def test_cmd_entry_points(tmp_path):
    from balancelaw.errors import ValidationError
    from balancelaw.harness.cli import cmd_sweep, cmd_verify
    from balancelaw.harness.config import parse_config

    cfg = parse_config('{"model":{"family":"broadwell"},"task":"verify","sample":{"count":20}}')
    assert cmd_verify(cfg, tmp_path / "v") == 0
    with pytest.raises(ValidationError):
        cmd_sweep(cfg, tmp_path / "s")
