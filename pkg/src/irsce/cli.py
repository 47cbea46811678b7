"""Command-line entry points: simulate, estimate, sweep, check.

Configuration files are YAML; every key mirrors a field of
ExperimentConfig (``system`` holds the SystemConfig fields, grids are
``{n_irs_az, n_irs_el, n_bs, n_delay}`` mappings).  Command-line flags
override file values.
"""

import dataclasses
import sys

import click
import numpy as np
import yaml

from . import channel as chan
from . import harness
from . import training as train
from .channel import SystemConfig
from .estimator import check_identifiability, scpd_estimate
from .harness import ExperimentConfig
from .somp import GridSpec, somp_estimate

SYSTEM_FIELDS = {f.name for f in dataclasses.fields(SystemConfig)}


def _load_experiment_config(path, overrides):
    raw = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
    raw.update({k: v for k, v in overrides.items() if v is not None})
    system_raw = raw.pop("system", {})
    unknown = set(system_raw) - SYSTEM_FIELDS
    if unknown:
        raise click.ClickException(f"unknown system keys: {sorted(unknown)}")
    kwargs = {"system": SystemConfig(**system_raw)}
    for grid_key in ("coarse_grid", "fine_grid"):
        if grid_key in raw:
            kwargs[grid_key] = GridSpec(**raw.pop(grid_key))
    for key in ("axis_name", "trials", "rank_mode", "snr_db", "seed",
                "record_timing"):
        if key in raw:
            kwargs[key] = raw.pop(key)
    if "axis_values" in raw:
        kwargs["axis_values"] = tuple(raw.pop("axis_values"))
    if "methods" in raw:
        kwargs["methods"] = tuple(raw.pop("methods"))
    raw.pop("output", None)
    if raw:
        raise click.ClickException(f"unknown config keys: {sorted(raw)}")
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise click.ClickException(str(exc))


def _load_system(path):
    if path is None:
        return SystemConfig()
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    raw = raw.get("system", raw)
    return SystemConfig(**{k: v for k, v in raw.items() if k in SYSTEM_FIELDS})


@click.group()
def main():
    """Cascade-channel estimation experiments for IRS-assisted mmWave OFDM."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="YAML config with a 'system' section.")
@click.option("--snr-db", type=float, default=10.0, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--output", type=click.Path(), required=True,
              help="Destination .npz instance file.")
def simulate(config_path, snr_db, seed, output):
    """Draw one channel + training instance and save it to a file."""
    system = _load_system(config_path)
    rng = np.random.default_rng(seed)
    paths = chan.draw_paths(system, rng)
    comp = chan.compose(paths, system)
    channels = chan.cascade_channels(paths, system)
    tm = train.gen_training(system, rng)
    clean = train.synthesize_rx(channels, tm)
    rx = train.add_noise(clean, snr_db, rng)
    harness.save_instance(output, system, rx, tm, comp, channels.cascade)
    click.echo(f"wrote instance to {output}")


@main.command()
@click.argument("instance", type=click.Path(exists=True))
@click.option("--method", type=click.Choice(harness.METHODS), default="scpd",
              show_default=True)
@click.option("--rank-mode", type=click.Choice(["oracle", "mdl"]),
              default="oracle", show_default=True)
def estimate(instance, method, rank_mode):
    """Run one estimator on a saved instance and print its NMSE."""
    system, rx, tm, comp, cascade = harness.load_instance(instance)
    if method == "scpd":
        rank = None if rank_mode == "mdl" else system.n_paths
        est = scpd_estimate(rx.y, tm, system, rank=rank)
        value = harness.nmse(est.cascade, cascade)
        click.echo(f"detected_rank={est.diagnostics['detected_rank']}")
    else:
        grid = (harness.DEFAULT_COARSE_GRID if method == "somp-coarse"
                else harness.DEFAULT_FINE_GRID)
        res = somp_estimate(rx.y, tm, system, grid, k=system.n_paths)
        value = harness.nmse(res.cascade, cascade)
    click.echo(f"nmse={value:.6e}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="YAML experiment config.")
@click.option("--seed", type=int, required=True)
@click.option("--trials", type=int, default=None)
@click.option("--rank-mode", type=click.Choice(["oracle", "mdl"]), default=None)
@click.option("--output", type=click.Path(), required=True,
              help="Per-trial CSV path; the aggregate CSV gets an "
                   "'.aggregate.csv' suffix.")
def sweep(config_path, seed, trials, rank_mode, output):
    """Run the full Monte-Carlo sweep described by the config."""
    cfg = _load_experiment_config(config_path, {
        "seed": seed, "trials": trials, "rank_mode": rank_mode})
    records, agg = harness.run_sweep(cfg)
    harness.write_trial_csv(records, output)
    agg_path = output + ".aggregate.csv" if not output.endswith(".csv") \
        else output[:-4] + ".aggregate.csv"
    harness.write_aggregate_csv(agg, agg_path)
    click.echo(f"wrote {len(records)} records to {output}")
    click.echo(f"wrote aggregates to {agg_path}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--rank", type=int, default=None,
              help="Candidate rank U; defaults to L*Lr from the config.")
def check(config_path, rank):
    """Print the identifiability report for a configuration."""
    system = _load_system(config_path)
    u = rank if rank is not None else system.n_paths
    report = check_identifiability(system, u)
    click.echo(f"U = {u}")
    click.echo(f"dimension_check (min((P-1)T, Q) >= U): {report.dimension_check}")
    click.echo(f"vandermonde_condition_holds: {report.vandermonde_condition_holds}")
    click.echo(f"kruskal_holds: {report.kruskal_holds}")
    for reason in report.reasons:
        click.echo(f"  - {reason}")
    if not report.ok:
        sys.exit(1)


if __name__ == "__main__":
    main()
