"""Command-line experiment runner.

Subcommands: simulate (paths only), construct (chains + masses),
spectrum (transforms + fits), verify (bounds suite), report (aggregate
tables + figures). Exit codes: 0 success, 2 invalid config, 3 unwritable
output, 4 all chains died (partial results written).
"""

import json
import os
import sys

import click

from ._rng import child_seed
from .brownian import generate_path, path_to_csv
from .config import ConfigError, ExperimentConfig
from .errors import InvalidArgumentError


def _load_config(config_path, seed, out):
    cfg = ExperimentConfig.from_json_file(config_path) if config_path else ExperimentConfig()
    if seed is not None:
        cfg.master_seed = seed
    if out is not None:
        cfg.output_dir = out
    cfg.validate()
    return cfg


def _fail_config(err):
    payload = err.to_json() if isinstance(err, ConfigError) else {"error": str(err)}
    click.echo(json.dumps(payload, sort_keys=True))
    sys.exit(2)


def _prepare_output(cfg):
    try:
        os.makedirs(cfg.output_dir, exist_ok=True)
        probe = os.path.join(cfg.output_dir, ".write_probe")
        with open(probe, "w") as fh:
            fh.write("ok")
        os.remove(probe)
    except OSError as exc:
        click.echo(json.dumps({"error": "unwritable-output", "detail": str(exc)}))
        sys.exit(3)


_shared = [
    click.option("--config", "config_path", type=click.Path(exists=True), default=None, help="JSON config file"),
    click.option("--seed", type=int, default=None, help="override master seed"),
    click.option("--out", type=click.Path(), default=None, help="override output directory"),
    click.option("--jobs", type=int, default=1, help="ensemble concurrency"),
]


def shared_options(fn):
    for opt in reversed(_shared):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Random measures on the rapid points of Brownian motion."""


@main.command()
@shared_options
@click.option("--resolution", type=int, default=None, help="grid resolution (default N^2)")
def simulate(config_path, seed, out, jobs, resolution):
    """Generate ensemble sample paths and dump them as t,x CSVs."""
    try:
        cfg = _load_config(config_path, seed, out)
    except (ConfigError, InvalidArgumentError) as err:
        _fail_config(err)
    _prepare_output(cfg)
    res = resolution or cfg.N * cfg.N
    for i in range(cfg.ensemble):
        path = generate_path(res, child_seed(cfg.master_seed, "run", i))
        with open(os.path.join(cfg.output_dir, f"path_{i:04d}.csv"), "w") as fh:
            path_to_csv(path, fh)
    click.echo(f"wrote {cfg.ensemble} paths at resolution {res} to {cfg.output_dir}")


def _run_pipeline(config_path, seed, out, jobs, spectrum_stages):
    from .runner import run_experiment

    try:
        cfg = _load_config(config_path, seed, out)
        cfg.spectrum_stages = spectrum_stages if spectrum_stages is not None else cfg.spectrum_stages
        cfg.validate()
    except (ConfigError, InvalidArgumentError) as err:
        _fail_config(err)
    _prepare_output(cfg)
    report = run_experiment(cfg, jobs=jobs)
    click.echo(
        f"ensemble {cfg.ensemble}: death rate {report.summary['death_rate']:.3f}; "
        f"summary at {os.path.join(cfg.output_dir, 'summary.json')}"
    )
    if report.all_died:
        click.echo("all chains died; partial results written")
        sys.exit(4)


@main.command()
@shared_options
def construct(config_path, seed, out, jobs):
    """Build measure chains and masses (no spectra)."""
    _run_pipeline(config_path, seed, out, jobs, "none")


@main.command()
@shared_options
def spectrum(config_path, seed, out, jobs):
    """Full pipeline: chains, spectra, decay fits and checks."""
    _run_pipeline(config_path, seed, out, jobs, None)


@main.command()
@click.option("--grid", "grid_path", type=click.Path(exists=True), default=None, help="JSON grid overrides")
@click.option("--out", type=click.Path(), default="verification.json")
def verify(grid_path, out):
    """Run the inequality verification suite."""
    from .verify import run_bounds_suite, write_report

    grids = None
    if grid_path:
        with open(grid_path) as fh:
            grids = json.load(fh)
    try:
        result = run_bounds_suite(grids)
    except InvalidArgumentError as err:
        click.echo(json.dumps({"error": str(err)}))
        sys.exit(2)
    write_report(result, out)
    click.echo(f"holds_all={result['holds_all']} ({out})")
    sys.exit(0 if result["holds_all"] else 1)


@main.command()
@click.option("--out", type=click.Path(exists=True), required=True, help="experiment output directory")
def report(out):
    """Aggregate an experiment directory into tables and figures."""
    from .report import render_report

    written = render_report(out)
    click.echo("wrote " + ", ".join(written))


if __name__ == "__main__":
    main()
