"""Study command: run a Monte Carlo study from a ``key = value`` config file."""

import logging
from pathlib import Path
from typing import Optional

import click
import pandas as pd

from ..dependencies import get_app_settings, load_experiment_config
from ..exceptions import AcceptanceFailure
from ..services.io_service import render, render_records, write_text
from ..services.study_service import StudyService
from .common import FORMAT_CHOICE, emit

logger = logging.getLogger(__name__)


def summary_path(out: str) -> Path:
    path = Path(out)
    return path.with_name(f"{path.stem}.summary.csv")


@click.command("study")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Records file (overrides the config).")
@click.option("--format", "fmt", type=FORMAT_CHOICE, default="csv", show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Worker processes for the replicas.")
def study(config_path: str, out: Optional[str], fmt: str, workers: Optional[int]) -> None:
    """Run the configured study, write its records and print the pass/fail line."""
    cfg = load_experiment_config(config_path)
    report = StudyService(get_app_settings()).run(cfg, workers=workers)

    target = out or cfg.output_path
    emit(render_records(report.records, fmt), target)
    if target and report.summary:
        write_text(render(pd.DataFrame(report.summary), "csv"), summary_path(target))

    for check in report.checks:
        level = logging.INFO if check.passed else logging.WARNING
        logger.log(level, f"{check.name}: value={check.value:.6g} threshold={check.threshold:.6g} {check.detail}")
    click.echo(report.summary_line(), err=True)
    if not report.passed:
        raise AcceptanceFailure(report.summary_line())
