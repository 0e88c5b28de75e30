"""Filtering commands: calibrate and filter, estimate signal parameters, error matrices."""

import logging
from typing import Optional

import click
import pandas as pd

from ..config import settings
from ..models.covariance_algebra import steady_cross_cov
from ..models.dmd_core import simulate_pair, stationary_variance
from ..models.empirical_estimation import calibrate, correction_terms, empirical_covariances
from ..models.error_analysis import empirical_error_matrix, error_matrix, error_report_row, gamma_coefficient
from ..models.filter_core import apply_filter, theoretical_filter
from ..schemas.estimation_schemas import Calibration
from ..services.io_service import error_report_frame, estimates_frame, filter_matrix_frame, read_pair_csv, render
from .common import emit, model_from_options, model_options, output_options

logger = logging.getLogger(__name__)


def calibration_options(func):
    func = click.option(
        "--drift-source",
        type=click.Choice(["interpolation", "full"]),
        default="interpolation",
        show_default=True,
        help="Filter column pair used for the V0 ratio.",
    )(func)
    func = click.option(
        "--block-mode",
        type=click.Choice(["raw", "structured"]),
        default="raw",
        show_default=True,
        help="Use the observation moments raw or impose their stationary structure.",
    )(func)
    func = click.option("--v", "v", type=float, default=None, help="Observation drift V (structured mode).")(func)
    return func


def _calibrate_file(input_path: str, v: Optional[float], block_mode: str, drift_source: str):
    if block_mode == "structured" and v is None:
        raise click.UsageError("--block-mode structured needs --v")
    pair = read_pair_csv(input_path)
    cal = calibrate(pair, mode=block_mode, v=v, drift_source=drift_source)
    logger.info(f"Calibrated on {input_path}: V0={cal.v0_est:.6g}, sigma0={cal.sigma0_est}")
    return pair, cal


@click.command("filter")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@calibration_options
@click.option("--phi-out", type=click.Path(dir_okay=False), default=None, help="Write the filter matrix here.")
@output_options
def filter_command(
    input_path: str,
    v: Optional[float],
    block_mode: str,
    drift_source: str,
    phi_out: Optional[str],
    out: Optional[str],
    fmt: str,
) -> None:
    """Calibrate on a paired CSV, filter beta and emit rows k, alpha_hat, d_alpha_hat.

    The filter matrix goes to --phi-out, or as key = value lines to stderr.
    """
    pair, cal = _calibrate_file(input_path, v, block_mode, drift_source)
    estimates = apply_filter(cal.phi, pair.beta)
    if phi_out:
        emit(render(filter_matrix_frame(cal.phi), fmt), phi_out)
    else:
        click.echo(cal.phi.to_kv_block(), err=True, nl=False)
    emit(render(estimates_frame(estimates), fmt), out)


def _calibration_frame(cal: Calibration) -> pd.DataFrame:
    row = {
        "horizon": cal.empirical.horizon,
        "v0_est": cal.v0_est,
        "sigma0_est": cal.sigma0_est,
        "sigma0_sq_est": cal.sigma0_sq_est,
        "r_alpha_est": cal.r_alpha_est,
    }
    row.update(cal.phi.as_dict())
    return pd.DataFrame([row])


@click.command("estimate")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@calibration_options
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json", "kv"]), default="csv", show_default=True)
def estimate(
    input_path: str,
    v: Optional[float],
    block_mode: str,
    drift_source: str,
    out: Optional[str],
    fmt: str,
) -> None:
    """Emit the calibrated V0, sigma0 and R_alpha estimates of a paired CSV."""
    _, cal = _calibrate_file(input_path, v, block_mode, drift_source)
    text = cal.to_kv_block() if fmt == "kv" else render(_calibration_frame(cal), fmt)
    emit(text, out)


@click.command("error")
@model_options
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Paired CSV for the empirical row (default: simulate one).")
@click.option("--steps", type=click.IntRange(min=2), default=10_000, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=None)
@output_options
def error(
    v0: float,
    sigma0: float,
    v: float,
    sigma: float,
    rho_w: float,
    input_path: Optional[str],
    steps: int,
    seed: Optional[int],
    out: Optional[str],
    fmt: str,
) -> None:
    """Emit the theoretical error matrix and the empirical MSE matrix of the exact filter."""
    model = model_from_options(v0, sigma0, v, sigma, rho_w)
    gamma = gamma_coefficient(
        steady_cross_cov(model),
        stationary_variance(model.signal),
        stationary_variance(model.observation),
    )
    theory = error_matrix(model, gamma)

    if input_path:
        pair = read_pair_csv(input_path)
    else:
        pair = simulate_pair(model, steps, seed=settings.DEFAULT_SEED if seed is None else seed, keep_noises=False)
    report = empirical_error_matrix(pair, theoretical_filter(model))
    z_scores = report.z_scores(theory)
    logger.info("Empirical vs theory z-scores: " + ", ".join(f"{k}={z:.2f}" for k, z in z_scores.items()))

    rows = [
        error_report_row(theory, gamma, source="theory"),
        error_report_row(report.matrix, gamma, source="empirical"),
    ]
    emit(render(error_report_frame(rows), fmt), out)


@click.command("covariances")
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@model_options
@click.option("--corrections/--no-corrections", default=False, show_default=True,
              help="Also measure A, B, C from the noise columns under the given model.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout).")
@click.option("--format", "fmt", type=click.Choice(["kv", "csv", "json"]), default="kv", show_default=True)
def covariances(
    input_path: str,
    v0: float,
    sigma0: float,
    v: float,
    sigma: float,
    rho_w: float,
    corrections: bool,
    out: Optional[str],
    fmt: str,
) -> None:
    """Emit the sample moments of a paired CSV and, optionally, the correction terms A, B, C."""
    pair = read_pair_csv(input_path)
    emp = empirical_covariances(pair)
    corr = correction_terms(pair, model_from_options(v0, sigma0, v, sigma, rho_w)) if corrections else None
    if fmt == "kv":
        text = emp.to_kv_block() + (corr.to_kv_block() if corr else "")
    else:
        row = emp.as_row()
        if corr:
            row.update(corr.as_row())
        text = render(pd.DataFrame([row]), fmt)
    emit(text, out)
