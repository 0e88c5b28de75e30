"""Simulation commands: single DMD trajectories, paired trajectories and
normalised fluctuations of relative frequencies."""

import logging
from typing import Optional, Sequence

import click
import numpy as np
import pandas as pd
from pydantic import ValidationError

from ..config import settings
from ..exceptions import DomainError
from ..models.dmd_core import normalized_fluctuations, simulate_dmd, simulate_pair
from ..schemas.params_schemas import DmdParams, FixedInit, InitMode, StationaryInit
from ..services.io_service import pair_frame, render, trajectory_frame
from .common import emit, model_from_options, model_options, output_options

logger = logging.getLogger(__name__)


def _params(v: float, sigma: float) -> DmdParams:
    try:
        return DmdParams(v=v, sigma=sigma)
    except ValidationError as exc:
        raise DomainError(f"Invalid DMD parameters: {exc.errors()[0]['msg']}") from exc


def init_options(func):
    """--init, --x0 and --burn-in."""
    func = click.option("--burn-in", type=click.IntRange(min=0), default=0, show_default=True,
                        help="Steps dropped before recording (--init fixed).")(func)
    func = click.option("--x0", type=float, default=0.0, show_default=True, help="Initial state for --init fixed.")(func)
    func = click.option("--init", "init_mode", type=click.Choice(["stationary", "fixed"]), default="stationary",
                        show_default=True)(func)
    return func


def _init(init_mode: str, x0: float, burn_in: int) -> InitMode:
    if init_mode == "fixed":
        return FixedInit(x0=x0, burn_in=burn_in)
    if burn_in or x0:
        logger.warning("--x0 and --burn-in are ignored without --init fixed")
    return StationaryInit()


@click.command("simulate")
@click.option("--v", "v", type=float, required=True, help="Drift V in (0, 2).")
@click.option("--sigma", type=float, default=1.0, show_default=True, help="Noise intensity.")
@click.option("--steps", type=click.IntRange(min=1), required=True, help="Number of transitions T.")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Generator seed.")
@init_options
@click.option("--noises/--no-noises", default=True, show_default=True, help="Include the w column.")
@output_options
def simulate(
    v: float,
    sigma: float,
    steps: int,
    seed: Optional[int],
    init_mode: str,
    x0: float,
    burn_in: int,
    noises: bool,
    out: Optional[str],
    fmt: str,
) -> None:
    """Simulate one DMD trajectory and emit rows k, zeta, d_zeta[, w]."""
    params = _params(v, sigma)
    init = _init(init_mode, x0, burn_in)
    seed = settings.DEFAULT_SEED if seed is None else seed
    traj = simulate_dmd(params, steps, init=init, seed=seed, keep_noises=noises)
    logger.info(f"Simulated DMD V={v} sigma={sigma} T={steps} seed={seed}")
    emit(render(trajectory_frame(traj), fmt), out)


@click.command("simulate-pair")
@model_options
@click.option("--steps", type=click.IntRange(min=1), required=True, help="Number of transitions T.")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Generator seed.")
@init_options
@click.option("--noises/--no-noises", default=True, show_default=True, help="Include the w0 and w columns.")
@output_options
def simulate_pair_command(
    v0: float,
    sigma0: float,
    v: float,
    sigma: float,
    rho_w: float,
    steps: int,
    seed: Optional[int],
    init_mode: str,
    x0: float,
    burn_in: int,
    noises: bool,
    out: Optional[str],
    fmt: str,
) -> None:
    """Simulate a signal/observation pair and emit rows k, alpha, d_alpha, beta, d_beta[, w0, w]."""
    model = model_from_options(v0, sigma0, v, sigma, rho_w)
    seed = settings.DEFAULT_SEED if seed is None else seed
    pair = simulate_pair(model, steps, seed=seed, keep_noises=noises, init=_init(init_mode, x0, burn_in))
    logger.info(f"Simulated pair {model.as_flat_dict()} T={steps} seed={seed}")
    emit(render(pair_frame(pair), fmt), out)


@click.command("fluctuations")
@click.argument("frequencies", nargs=-1, type=float)
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="CSV with a column s of relative frequencies.")
@click.option("--rho", type=float, required=True, help="Equilibrium frequency in (0, 1).")
@click.option("--n", "n", type=click.IntRange(min=1), required=True, help="Sample size N.")
@output_options
def fluctuations(
    frequencies: Sequence[float],
    input_path: Optional[str],
    rho: float,
    n: int,
    out: Optional[str],
    fmt: str,
) -> None:
    """Emit normalised fluctuations sqrt(N) (S_N(k) - rho) as rows k, s, zeta."""
    if input_path:
        source = pd.read_csv(input_path, float_precision="round_trip")
        if "s" not in source.columns:
            raise DomainError(f"{input_path} lacks column s")
        values = source["s"].to_numpy(dtype=float)
    elif frequencies:
        values = np.asarray(frequencies, dtype=float)
    else:
        raise click.UsageError("Give relative frequencies as arguments or with --input")
    zeta = normalized_fluctuations(values, rho, n)
    frame = pd.DataFrame({"k": np.arange(values.size, dtype=np.int64), "s": values, "zeta": zeta})
    emit(render(frame, fmt), out)
