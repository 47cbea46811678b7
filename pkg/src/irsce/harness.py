"""Monte-Carlo experiment orchestration, metrics and persistence.

A sweep is a pure function of (config, master seed): per-trial RNG
streams are derived as SeedSequence([master, axis_index, trial]), so
adding methods or axis points never perturbs the channel draws of other
points.  Per-trial and aggregate results are written as CSV with a fixed
header (17 significant digits); simulation instances round-trip through
a versioned .npz container with an embedded config snapshot.
"""

import dataclasses
import json
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import channel as chan
from . import somp as somp_mod
from . import training as train
from .channel import CompositePathSet, SystemConfig
from .estimator import EstimationError, scpd_estimate
from .linalg import FactorizationError
from .somp import GridSpec

TRIAL_CSV_COLUMNS = [
    "axis_value", "trial", "seed", "method", "nmse", "mse_omega_a",
    "mse_omega_e", "mse_phi", "mse_iota", "mse_beta", "detected_rank",
    "fail_flag", "wall_ms",
]
AGGREGATE_CSV_COLUMNS = [
    "axis_value", "method", "trials", "failures", "median_nmse", "mean_nmse",
    "median_nmse_ok", "mean_nmse_ok",
]
INSTANCE_FORMAT_VERSION = 1

DEFAULT_COARSE_GRID = GridSpec(n_irs_az=16, n_irs_el=16, n_bs=32)
DEFAULT_FINE_GRID = GridSpec(n_irs_az=32, n_irs_el=32, n_bs=64)

METHODS = ("scpd", "somp-coarse", "somp-fine")


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: system constants, the axis to vary, and how to score."""

    system: SystemConfig = field(default_factory=SystemConfig)
    axis_name: str = "snr"                  # snr | t | p | q
    axis_values: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    trials: int = 10
    methods: tuple = ("scpd",)
    rank_mode: str = "oracle"               # oracle | mdl
    snr_db: float = 10.0                    # fixed SNR for non-snr axes
    seed: int = 0
    coarse_grid: GridSpec = DEFAULT_COARSE_GRID
    fine_grid: GridSpec = DEFAULT_FINE_GRID
    record_timing: bool = False             # measured wall_ms breaks byte-level determinism

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.axis_values:
            raise ValueError("axis_values must be non-empty")
        if self.axis_name not in ("snr", "t", "p", "q"):
            raise ValueError(f"unknown sweep axis {self.axis_name!r}")
        if self.rank_mode not in ("oracle", "mdl"):
            raise ValueError(f"unknown rank mode {self.rank_mode!r}")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one method on one trial."""

    axis_value: float
    trial: int
    seed: int
    method: str
    nmse: float
    mse_omega_a: float
    mse_omega_e: float
    mse_phi: float
    mse_iota: float
    mse_beta: float
    detected_rank: int
    fail_flag: int
    wall_ms: float


def nmse(estimate, truth):
    """sum_p ||Hhat_p - H_p||_F^2 / sum_p ||H_p||_F^2."""
    truth = np.asarray(truth)
    denom = np.sum(np.abs(truth) ** 2)
    if denom == 0.0:
        raise ValueError("truth channels are identically zero")
    return float(np.sum(np.abs(np.asarray(estimate) - truth) ** 2) / denom)


def _wrapped(a, b):
    """Wrapped angular distance on [0, 2*pi)."""
    d = np.mod(np.asarray(a) - np.asarray(b), 2.0 * np.pi)
    return np.minimum(d, 2.0 * np.pi - d)


def align_paths(est, truth, cfg):
    """Match estimated composite paths to the truth and report squared errors.

    Matching minimizes the sum of wrapped angular distances plus the
    delay distance normalized by the unambiguous range P0/fs; the CPD
    permutation ambiguity makes this alignment necessary before any
    per-parameter error is meaningful.
    """
    u = len(truth.gain)
    if len(est.gain) != u:
        raise ValueError(f"size mismatch: estimate has {len(est.gain)} paths, "
                         f"truth has {u}")
    period = cfg.p0 / cfg.fs
    cost = (
        _wrapped(est.irs_az[:, None], truth.irs_az[None, :])
        + _wrapped(est.irs_el[:, None], truth.irs_el[None, :])
        + _wrapped(est.bs_aod[:, None], truth.bs_aod[None, :])
        + _wrapped(2.0 * np.pi * est.delay[:, None] / period,
                   2.0 * np.pi * truth.delay[None, :] / period)
    )
    rows, cols = linear_sum_assignment(cost)
    order = rows[np.argsort(cols)]          # est index matched to truth index i
    errors = {
        "omega_a": float(np.mean(_wrapped(est.irs_az[order], truth.irs_az) ** 2)),
        "omega_e": float(np.mean(_wrapped(est.irs_el[order], truth.irs_el) ** 2)),
        "phi": float(np.mean(_wrapped(est.bs_aod[order], truth.bs_aod) ** 2)),
        "iota": float(np.mean((_wrapped(2.0 * np.pi * est.delay[order] / period,
                                        2.0 * np.pi * truth.delay / period)
                               * period / (2.0 * np.pi)) ** 2)),
        "beta": float(np.mean(np.abs(est.gain[order] - truth.gain) ** 2)),
    }
    return order, errors


def trial_seed(master_seed, axis_index, trial):
    """Stable per-trial stream derivation; shared by every method."""
    return np.random.SeedSequence([master_seed, axis_index, trial])


def _config_at(cfg, axis_value):
    if cfg.axis_name == "snr":
        return cfg.system, float(axis_value)
    return dataclasses.replace(cfg.system, **{cfg.axis_name: int(axis_value)}), cfg.snr_db


def run_sweep(cfg, progress=None):
    """Execute the full sweep; returns (records, aggregate rows).

    Method failures are recorded with nmse=1 and a fail flag instead of
    aborting the sweep.
    """
    records = []
    for axis_index, axis_value in enumerate(cfg.axis_values):
        system, snr_db = _config_at(cfg, axis_value)
        for trial in range(cfg.trials):
            seq = trial_seed(cfg.seed, axis_index, trial)
            seed_int = int(seq.generate_state(1)[0])
            rng = np.random.default_rng(seq)
            paths = chan.draw_paths(system, rng)
            comp = chan.compose(paths, system)
            channels = chan.cascade_channels(paths, system)
            tm = train.gen_training(system, rng)
            clean = train.synthesize_rx(channels, tm)
            rx = train.add_noise(clean, snr_db, rng)
            for method in cfg.methods:
                rec = _score_method(method, rx.y, tm, system, comp,
                                    channels.cascade, cfg, axis_value,
                                    trial, seed_int)
                records.append(rec)
            if progress is not None:
                progress(axis_index, trial)
    return records, aggregate(records)


def _score_method(method, y, tm, system, comp, truth_cascade, cfg,
                  axis_value, trial, seed_int):
    start = time.perf_counter()
    nan = float("nan")
    mse = dict.fromkeys(("omega_a", "omega_e", "phi", "iota", "beta"), nan)
    detected = -1
    fail = 0
    try:
        if method == "scpd":
            rank = None if cfg.rank_mode == "mdl" else system.n_paths
            est = scpd_estimate(y, tm, system, rank=rank)
            detected = est.diagnostics.get("detected_rank", -1)
            value = nmse(est.cascade, truth_cascade)
            if detected == system.n_paths:
                _, mse = align_paths(est, comp, system)
        else:
            grid = cfg.coarse_grid if method == "somp-coarse" else cfg.fine_grid
            res = somp_mod.somp_estimate(y, tm, system, grid, k=system.n_paths)
            detected = len(res.support)
            value = nmse(res.cascade, truth_cascade)
    except (EstimationError, FactorizationError, ValueError):
        value = 1.0
        fail = 1
    wall = (time.perf_counter() - start) * 1e3 if cfg.record_timing else 0.0
    return RunRecord(axis_value=float(axis_value), trial=trial, seed=seed_int,
                     method=method, nmse=value, mse_omega_a=mse["omega_a"],
                     mse_omega_e=mse["omega_e"], mse_phi=mse["phi"],
                     mse_iota=mse["iota"], mse_beta=mse["beta"],
                     detected_rank=detected, fail_flag=fail, wall_ms=wall)


def aggregate(records):
    """Per-(axis point, method) summary rows, with and without failures."""
    keys = []
    groups = {}
    for r in records:
        key = (r.axis_value, r.method)
        if key not in groups:
            groups[key] = []
            keys.append(key)
        groups[key].append(r)
    rows = []
    for axis_value, method in keys:
        rs = groups[(axis_value, method)]
        all_nmse = np.array([r.nmse for r in rs])
        ok_nmse = np.array([r.nmse for r in rs if not r.fail_flag])
        rows.append({
            "axis_value": axis_value,
            "method": method,
            "trials": len(rs),
            "failures": int(sum(r.fail_flag for r in rs)),
            "median_nmse": float(np.median(all_nmse)),
            "mean_nmse": float(np.mean(all_nmse)),
            "median_nmse_ok": float(np.median(ok_nmse)) if len(ok_nmse) else float("nan"),
            "mean_nmse_ok": float(np.mean(ok_nmse)) if len(ok_nmse) else float("nan"),
        })
    return rows


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_trial_csv(records, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(TRIAL_CSV_COLUMNS) + "\n")
        for r in records:
            fh.write(",".join(_fmt(getattr(r, c)) for c in TRIAL_CSV_COLUMNS) + "\n")


def write_aggregate_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(AGGREGATE_CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in AGGREGATE_CSV_COLUMNS) + "\n")


def system_config_to_dict(system):
    return dataclasses.asdict(system)


def system_config_from_dict(d):
    return SystemConfig(**d)


def save_instance(path, system, rx, tm, comp, cascade):
    """Persist one simulated instance (versioned .npz container)."""
    np.savez_compressed(
        path,
        format_version=INSTANCE_FORMAT_VERSION,
        config_json=json.dumps(system_config_to_dict(system)),
        y=rx.y, noise=rx.noise, snr_db=rx.snr_db,
        v=tm.v, f=tm.f,
        truth_gain=comp.gain, truth_delay=comp.delay,
        truth_irs_az=comp.irs_az, truth_irs_el=comp.irs_el,
        truth_bs_aod=comp.bs_aod,
        truth_cascade=cascade,
    )


def load_instance(path):
    """Load an instance saved by :func:`save_instance`."""
    with np.load(path, allow_pickle=False) as data:
        version = int(data["format_version"])
        if version != INSTANCE_FORMAT_VERSION:
            raise ValueError(f"unsupported instance format version {version}")
        system = system_config_from_dict(json.loads(str(data["config_json"])))
        rx = train.ReceivedTensor(y=data["y"], noise=data["noise"],
                                  snr_db=float(data["snr_db"]))
        tm = train.TrainingMatrices(v=data["v"], f=data["f"])
        comp = CompositePathSet(gain=data["truth_gain"],
                                delay=data["truth_delay"],
                                irs_az=data["truth_irs_az"],
                                irs_el=data["truth_irs_el"],
                                bs_aod=data["truth_bs_aod"])
        cascade = data["truth_cascade"]
    return system, rx, tm, comp, cascade
