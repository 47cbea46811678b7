"""Tests for the command-line interface."""

import numpy as np
import yaml
from click.testing import CliRunner

from irsce.cli import main

SMALL_SYSTEM = dict(n_bs=8, mx=4, my=4, p0=64, p=5, q=8, t=4)


def _write_yaml(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(payload, fh)


def test_simulate_then_estimate(tmp_path):
    runner = CliRunner()
    cfg_path = tmp_path / "cfg.yaml"
    _write_yaml(cfg_path, {"system": SMALL_SYSTEM})
    inst = tmp_path / "inst.npz"
    res = runner.invoke(main, ["simulate", "--config", str(cfg_path),
                               "--snr-db", "25", "--seed", "3",
                               "--output", str(inst)])
    assert res.exit_code == 0, res.output
    assert inst.exists()
    res = runner.invoke(main, ["estimate", str(inst), "--method", "scpd"])
    assert res.exit_code == 0, res.output
    assert "nmse=" in res.output
    assert "detected_rank=" in res.output


def test_sweep_writes_both_csvs_and_is_deterministic(tmp_path):
    runner = CliRunner()
    cfg_path = tmp_path / "cfg.yaml"
    _write_yaml(cfg_path, {
        "system": SMALL_SYSTEM,
        "axis_name": "snr",
        "axis_values": [10.0],
        "trials": 2,
        "methods": ["scpd"],
    })
    outputs = []
    for run in range(2):
        out = tmp_path / f"run{run}.csv"
        res = runner.invoke(main, ["sweep", "--config", str(cfg_path),
                                   "--seed", "11", "--output", str(out)])
        assert res.exit_code == 0, res.output
        agg = tmp_path / f"run{run}.aggregate.csv"
        assert out.exists() and agg.exists()
        outputs.append((out.read_bytes(), agg.read_bytes()))
    assert outputs[0] == outputs[1]


def test_check_reports_failure_with_nonzero_exit(tmp_path):
    runner = CliRunner()
    bad = dict(SMALL_SYSTEM, q=3)
    cfg_path = tmp_path / "bad.yaml"
    _write_yaml(cfg_path, {"system": bad})
    res = runner.invoke(main, ["check", "--config", str(cfg_path)])
    assert res.exit_code == 1
    assert "dimension_check" in res.output
    good_path = tmp_path / "good.yaml"
    _write_yaml(good_path, {"system": SMALL_SYSTEM})
    res = runner.invoke(main, ["check", "--config", str(good_path)])
    assert res.exit_code == 0


def test_unknown_config_keys_rejected(tmp_path):
    runner = CliRunner()
    cfg_path = tmp_path / "cfg.yaml"
    _write_yaml(cfg_path, {"system": SMALL_SYSTEM, "bandwidth": 1e9})
    res = runner.invoke(main, ["sweep", "--config", str(cfg_path),
                               "--seed", "1",
                               "--output", str(tmp_path / "o.csv")])
    assert res.exit_code != 0
    assert "unknown config keys" in res.output
