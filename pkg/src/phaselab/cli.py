"""Command line interface.

    phaselab <kind> --config <file> [--threads N] [--out DIR]
    phaselab verify --suite fast|full

Exit codes: 0 success, 2 config error, 3 runtime error, 4 verification
failures present.
"""

from __future__ import annotations

import json
import os
import sys

import click

from . import checks
from .exceptions import ConfigError, PhaseLabError
from .experiments import KINDS, ExperimentConfig, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4


def _load_config(path: str, kind: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    config = ExperimentConfig.from_json(text)
    if config.kind != kind:
        raise ConfigError(f"config kind {config.kind!r} does not match subcommand {kind!r}")
    return config


def _run_kind(kind: str, config_path: str, threads: int, out: str) -> int:
    try:
        config = _load_config(config_path, kind)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    try:
        summary = run(config, out, threads=threads)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return EXIT_CONFIG
    except (PhaseLabError, OSError) as exc:
        click.echo(f"runtime error: {exc}", err=True)
        return EXIT_RUNTIME
    click.echo(json.dumps(summary, sort_keys=True))
    return EXIT_OK


@click.group()
def main():
    """Phaseless measurement experiments and verification."""


def _register(kind: str):
    @main.command(name=kind, help=f"Run a '{kind}' experiment from a JSON config.")
    @click.option("--config", "config_path", required=True, type=click.Path(),
                  help="Path to the JSON experiment config.")
    @click.option("--threads", default=os.cpu_count() or 1, show_default="logical cores",
                  type=int, help="Worker pool size for per-trial parallelism.")
    @click.option("--out", default=".", show_default=True, type=click.Path(),
                  help="Output directory for CSV/JSON artifacts.")
    def _command(config_path, threads, out, _kind=kind):
        sys.exit(_run_kind(_kind, config_path, threads, out))


for _kind in KINDS:
    _register(_kind)


@main.command(name="verify", help="Run the fast or full verification suite.")
@click.option("--suite", default=checks.FAST, show_default=True,
              type=click.Choice([checks.FAST, checks.FULL]))
def verify_command(suite):
    try:
        results = checks.verify(suite)
    except PhaseLabError as exc:
        click.echo(f"runtime error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    click.echo(checks.format_report(results))
    sys.exit(EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY)
