"""Options and output helpers shared by the command modules."""

import logging
from typing import Callable, Optional

import click

from ..dependencies import build_model
from ..schemas.params_schemas import SignalObservationModel
from ..services.io_service import write_text

logger = logging.getLogger(__name__)

FORMAT_CHOICE = click.Choice(["csv", "json"])


def model_options(func: Callable) -> Callable:
    """Attach --v0/--sigma0/--v/--sigma/--rho-w for a signal/observation model."""
    options = [
        click.option("--v0", type=float, default=0.4, show_default=True, help="Signal drift V0 in (0, 2)."),
        click.option("--sigma0", type=float, default=1.0, show_default=True, help="Signal noise intensity."),
        click.option("--v", "v", type=float, default=0.5, show_default=True, help="Observation drift V in (0, 2)."),
        click.option("--sigma", type=float, default=1.0, show_default=True, help="Observation noise intensity."),
        click.option("--rho-w", type=float, default=0.0, show_default=True, help="Noise correlation in [-1, 1]."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def model_from_options(v0: float, sigma0: float, v: float, sigma: float, rho_w: float) -> SignalObservationModel:
    return build_model(v0=v0, sigma0=sigma0, v=v, sigma=sigma, rho_w=rho_w)


def output_options(func: Callable) -> Callable:
    func = click.option("--format", "fmt", type=FORMAT_CHOICE, default="csv", show_default=True)(func)
    func = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout).")(func)
    return func


def emit(text: str, out: Optional[str]) -> None:
    """Write ``text`` to ``out`` or to stdout."""
    if out:
        write_text(text, out)
    else:
        click.echo(text, nl=False)
