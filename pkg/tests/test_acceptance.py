"""Acceptance suite: one test per release criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible with
``pytest -s`` or on failure) and asserts the criterion at its stated
tolerance.  All Monte-Carlo runs are fully seeded, so the observed
statistics are reproducible bit for bit.
"""

import time

import numpy as np
import pytest

from irsce.channel import SystemConfig, cascade_channels, compose, draw_paths
from irsce.estimator import EstimationError, check_identifiability, \
    scpd_decompose, scpd_estimate
from irsce.harness import (ExperimentConfig, align_paths, nmse, run_sweep,
                           write_aggregate_csv, write_trial_csv)
from irsce.training import build_factors, factors_to_tensor, gen_training, \
    synthesize_rx

# Frozen reference for the reduced-measurement criterion: median NMSE of
# the scpd method at P=Q=T=8, SNR=10 dB, 100 trials, master seed 424242
# (run_sweep with methods=("scpd",)).  Regenerating with those settings
# reproduces the value exactly.
REFERENCE_MEDIAN_NMSE_8CUBE = 0.153232


def _report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_dual_route_synthesis_identity():
    """Physical measurement loop vs CP-factor synthesis on 100 random configs."""
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        cfg = SystemConfig(
            n_bs=int(rng.integers(2, 9)), mx=int(rng.integers(2, 5)),
            my=int(rng.integers(2, 5)), p0=64,
            p=int(rng.integers(2, 7)), q=int(rng.integers(2, 7)),
            t=int(rng.integers(2, 7)),
            l_bi=int(rng.integers(1, 4)), l_iu=int(rng.integers(1, 4)))
        paths = draw_paths(cfg, rng)
        channels = cascade_channels(paths, cfg)
        tm = gen_training(cfg, rng)
        direct = synthesize_rx(channels, tm)
        via_cpd = factors_to_tensor(build_factors(compose(paths, cfg), tm, cfg))
        rel = np.linalg.norm(direct - via_cpd) / np.linalg.norm(direct)
        worst = max(worst, rel)
    elapsed = time.perf_counter() - start
    _report("dual-route synthesis identity",
            worst <= 1e-12 and elapsed < 10.0,
            f"worst rel err {worst:.3g} over 100 configs in {elapsed:.2f}s")


def test_noiseless_exact_recovery():
    """P=Q=T=16, U=4, no noise, oracle rank: NMSE <= 1e-10 in >= 49/50."""
    cfg = SystemConfig(p=16, q=16, t=16)
    start = time.perf_counter()
    hits = 0
    param_ok = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        paths = draw_paths(cfg, rng)
        channels = cascade_channels(paths, cfg)
        comp = compose(paths, cfg)
        tm = gen_training(cfg, rng)
        y = synthesize_rx(channels, tm)
        est = scpd_estimate(y, tm, cfg, rank=cfg.n_paths)
        if nmse(est.cascade, channels.cascade) <= 1e-10:
            hits += 1
            _, errors = align_paths(est, comp, cfg)
            if max(errors["omega_a"], errors["omega_e"],
                   errors["phi"]) < 1e-12:
                param_ok += 1
    elapsed = time.perf_counter() - start
    _report("noiseless exact recovery",
            hits >= 49 and param_ok == hits and elapsed < 60.0,
            f"{hits}/50 trials at NMSE<=1e-10 (angles at tolerance in "
            f"{param_ok}) in {elapsed:.1f}s")


def test_identifiability_boundary():
    """Success at min((P-1)T, Q) = U = 4; diagnosable failure at Q = 3."""
    boundary = SystemConfig(p=3, t=2, q=16)
    assert min((boundary.p - 1) * boundary.t, boundary.q) == boundary.n_paths
    hits = 0
    for seed in range(20):
        rng = np.random.default_rng(seed)
        paths = draw_paths(boundary, rng)
        channels = cascade_channels(paths, boundary)
        tm = gen_training(boundary, rng)
        y = synthesize_rx(channels, tm)
        est = scpd_estimate(y, tm, boundary, rank=boundary.n_paths)
        hits += nmse(est.cascade, channels.cascade) <= 1e-10

    starved = SystemConfig(p=16, t=16, q=3)
    report = check_identifiability(starved, 4)
    rng = np.random.default_rng(0)
    paths = draw_paths(starved, rng)
    channels = cascade_channels(paths, starved)
    tm = gen_training(starved, rng)
    y = synthesize_rx(channels, tm)
    with pytest.raises(EstimationError, match="identifiability"):
        scpd_decompose(y, 4)

    _report("identifiability boundary",
            hits == 20 and not report.ok,
            f"boundary config {hits}/20 exact; Q=3 flagged with "
            f"reasons {list(report.reasons)}")


def test_snr_monotonicity():
    """Median NMSE strictly decreasing over {0,5,10,15,20} dB, 100 trials."""
    cfg = ExperimentConfig(system=SystemConfig(p=8, q=8, t=8),
                           axis_name="snr",
                           axis_values=(0.0, 5.0, 10.0, 15.0, 20.0),
                           trials=100, methods=("scpd",), seed=20260824)
    _, agg = run_sweep(cfg)
    medians = [row["median_nmse"] for row in agg]
    strict = all(a > b for a, b in zip(medians, medians[1:]))
    _report("snr monotonicity", strict,
            "medians " + ", ".join(f"{m:.4g}" for m in medians))


def test_tensor_method_beats_greedy_baseline():
    """Median NMSE lower than the greedy baseline on both grid sizes at
    10 dB, and the baseline shows a high-SNR error floor."""
    cfg = ExperimentConfig(system=SystemConfig(p=8, q=8, t=8),
                           axis_name="snr", axis_values=(10.0,), trials=100,
                           methods=("scpd", "somp-coarse", "somp-fine"),
                           seed=424242)
    _, agg = run_sweep(cfg)
    med = {row["method"]: row["median_nmse"] for row in agg}

    floor_cfg = ExperimentConfig(system=SystemConfig(p=8, q=8, t=8),
                                 axis_name="snr", axis_values=(20.0, 40.0),
                                 trials=25, methods=("scpd", "somp-fine"),
                                 seed=777)
    _, floor_agg = run_sweep(floor_cfg)
    fmed = {(row["axis_value"], row["method"]): row["median_nmse"]
            for row in floor_agg}
    # grid mismatch keeps the baseline pinned while the gridless method
    # keeps improving with SNR
    somp_floored = fmed[(40.0, "somp-fine")] > 0.5 * fmed[(20.0, "somp-fine")]
    scpd_improves = fmed[(40.0, "scpd")] < 0.1 * fmed[(20.0, "scpd")]

    ok = (med["scpd"] < med["somp-coarse"]
          and med["scpd"] < med["somp-fine"]
          and somp_floored and scpd_improves)
    _report("tensor method vs greedy baseline", ok,
            f"10dB medians scpd {med['scpd']:.3g} vs coarse "
            f"{med['somp-coarse']:.3g} / fine {med['somp-fine']:.3g}; "
            f"baseline floor {fmed[(20.0, 'somp-fine')]:.3g}->"
            f"{fmed[(40.0, 'somp-fine')]:.3g} at 20->40 dB")


def test_reduced_measurement_budget():
    """P=Q=8, T=4 (256 measurements): median NMSE within 3x the frozen
    full-budget reference median."""
    cfg = ExperimentConfig(system=SystemConfig(p=8, q=8, t=4),
                           axis_name="snr", axis_values=(10.0,), trials=100,
                           methods=("scpd",), seed=3131)
    _, agg = run_sweep(cfg)
    median = agg[0]["median_nmse"]
    threshold = 3.0 * REFERENCE_MEDIAN_NMSE_8CUBE
    _report("reduced measurement budget", median <= threshold,
            f"median {median:.4g} vs threshold {threshold:.4g}")


def test_mdl_rank_detection():
    """Correct rank in >= 90/100 trials, P=Q=T=16, high SNR.

    Run at 30 dB: composite gains are products of two Rayleigh-faded
    factors, so at lower SNRs the weakest path regularly drops below the
    noise floor and no model-order rule can see it.
    """
    cfg = ExperimentConfig(system=SystemConfig(p=16, q=16, t=16),
                           axis_name="snr", axis_values=(30.0,), trials=100,
                           methods=("scpd",), rank_mode="mdl", seed=515)
    records, _ = run_sweep(cfg)
    hits = sum(r.detected_rank == 4 for r in records)
    _report("mdl rank detection", hits >= 90, f"{hits}/100 correct at 30 dB")


def test_sweep_determinism(tmp_path):
    """Identical config + seed twice: byte-identical trial and aggregate CSVs."""
    cfg = ExperimentConfig(system=SystemConfig(p=5, q=8, t=4, mx=4, my=4,
                                               n_bs=8, p0=64),
                           axis_name="snr", axis_values=(0.0, 10.0), trials=3,
                           methods=("scpd", "somp-coarse"), seed=99)
    blobs = []
    for run in range(2):
        records, agg = run_sweep(cfg)
        tp = tmp_path / f"t{run}.csv"
        ap = tmp_path / f"a{run}.csv"
        write_trial_csv(records, tp)
        write_aggregate_csv(agg, ap)
        blobs.append((tp.read_bytes(), ap.read_bytes()))
    _report("sweep determinism", blobs[0] == blobs[1],
            "two runs produced byte-identical CSV outputs")
