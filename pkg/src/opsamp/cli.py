"""Command line entry point for running experiment configurations.

Exit codes: 0 when every verdict holds, 2 when the experiment ran but an
acceptance check failed, 1 for configuration errors and infeasible setups.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .experiments import ConfigError, ExperimentConfig, run as run_experiment, write_report


@click.group()
def main():
    """Operator sampling experiments: simulate, recover, and verify."""


@main.command(name="run")
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", default=None, help="Output directory (overrides the config).")
@click.option("--seed", "seed", type=int, default=None, help="Master seed (overrides the config).")
@click.option("--threads", type=int, default=1, show_default=True, help="Worker threads for trials.")
def run_command(config_path: str, out_dir, seed, threads: int):
    """Run one experiment described by a JSON config file."""
    try:
        doc = json.loads(Path(config_path).read_text())
        if seed is not None:
            doc["seed"] = seed
        if out_dir is not None:
            doc["outdir"] = out_dir
        config = ExperimentConfig.from_dict(doc)
    except (ConfigError, json.JSONDecodeError, OSError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)

    report = run_experiment(config, threads=max(1, threads))
    paths = write_report(report, config.outdir)
    for path in paths:
        click.echo(f"wrote {path}")

    if report.error is not None:
        click.echo(f"error: {report.error['type']}: {report.error['message']}", err=True)
        sys.exit(1)
    for name, ok in report.verdicts.items():
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}")
    click.echo(f"{config.experiment}: {'passed' if report.passed else 'failed'} "
               f"in {report.elapsed_seconds:.2f}s")
    sys.exit(0 if report.passed else 2)
