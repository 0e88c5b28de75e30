"""Monte Carlo study service.

Runs the reproducible experiment studies (consistency of the calibration
estimates, error-matrix validation, correlation sweep of the correction terms and
stationarity checks), summarises the records per group and judges the
acceptance checks of each study.
"""

import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats
from tqdm import tqdm

from ..config import Settings, get_settings
from ..dependencies import derive_replica_seed
from ..exceptions import DmdError, DomainError
from ..models.covariance_algebra import steady_cross_cov
from ..models.dmd_core import check_equivalence, effective_factor, simulate_dmd, simulate_pair, stationary_variance
from ..models.empirical_estimation import calibrate, correction_terms, empirical_covariances, second_addendum
from ..models.error_analysis import empirical_error_matrix, error_matrix, gamma_coefficient
from ..models.filter_core import full_ratio_limit, theoretical_filter
from ..models.utils import median_abs_error, pooled_z
from ..schemas.estimation_schemas import BlockMode, DriftSource
from ..schemas.params_schemas import InitMode, SignalObservationModel, StationaryInit
from ..schemas.study_schemas import ExperimentConfig, StudyCheck, StudyKind, StudyRecord, StudyReport

logger = logging.getLogger(__name__)

_SUMMARY_COLUMNS: Dict[str, List[str]] = {
    "consistency": ["v0_est", "sigma0_est", "sigma0_sq_est", "r_alpha_est", "phi11", "phi21"],
    "error_validation": ["g11_mc", "g12_mc", "g22_mc", "trace_mc", "z_g11", "z_g12", "z_g22", "z_trace"],
    "correlation_sweep": ["a_t", "b_t", "c_t", "s11", "s12", "s21", "s22"],
    "stationarity_check": ["r_hat", "z_variance", "z_halves", "z_r0", "z_rD", "w_mean", "w_var", "w_lag1"],
}


class ReplicaTask(NamedTuple):
    """Everything a worker process needs to produce one record."""

    study: StudyKind
    model: SignalObservationModel
    horizon: int
    replica: int
    seed: int
    block_mode: BlockMode
    drift_source: DriftSource
    record_wall_time: bool
    init: InitMode = StationaryInit()
    indeterminate_z: Optional[float] = None
    batch_count: Optional[int] = None


def _consistency_fields(task: ReplicaTask) -> Dict[str, Any]:
    pair = simulate_pair(task.model, task.horizon, seed=task.seed, keep_noises=False, init=task.init)
    cal = calibrate(
        pair,
        mode=task.block_mode,
        v=task.model.v,
        drift_source=task.drift_source,
        z_min=task.indeterminate_z,
    )
    fields = {
        "v0_est": cal.v0_est,
        "sigma0_est": cal.sigma0_est,
        "sigma0_sq_est": cal.sigma0_sq_est,
        "r_alpha_est": cal.r_alpha_est,
    }
    fields.update(cal.phi.as_dict())
    return fields


def _error_validation_fields(task: ReplicaTask) -> Dict[str, Any]:
    model = task.model
    gamma = gamma_coefficient(
        steady_cross_cov(model),
        stationary_variance(model.signal),
        stationary_variance(model.observation),
    )
    theory = error_matrix(model, gamma)
    phi = theoretical_filter(model)
    pair = simulate_pair(model, task.horizon, seed=task.seed, keep_noises=False, init=task.init)
    report = empirical_error_matrix(pair, phi, n_batches=task.batch_count)
    fields = {
        "gamma_ab": gamma.value,
        "g11_theory": theory.g11,
        "g12_theory": theory.g12,
        "g22_theory": theory.g22,
        "trace_theory": theory.trace,
        "g11_mc": report.matrix.g11,
        "g12_mc": report.matrix.g12,
        "g22_mc": report.matrix.g22,
        "trace_mc": report.matrix.trace,
    }
    fields.update(phi.as_dict())
    fields.update(report.z_scores(theory))
    return fields


def _correlation_sweep_fields(task: ReplicaTask) -> Dict[str, Any]:
    pair = simulate_pair(task.model, task.horizon, seed=task.seed, keep_noises=True, init=task.init)
    corr = correction_terms(pair, task.model)
    addendum = second_addendum(corr, empirical_covariances(pair), task.model.v)
    return {
        "a_t": corr.a_t,
        "b_t": corr.b_t,
        "c_t": corr.c_t,
        "s11": addendum.phi11,
        "s12": addendum.phi12,
        "s21": addendum.phi21,
        "s22": addendum.phi22,
    }


def _stationarity_fields(task: ReplicaTask) -> Dict[str, Any]:
    traj = simulate_dmd(task.model.signal, task.horizon, init=task.init, seed=task.seed)
    report = check_equivalence(traj, task.model.signal, n_batches=task.batch_count)
    return {
        "r_hat": report.moments.r,
        "z_variance": report.z_variance,
        "z_halves": report.z_halves,
        "z_r0": report.z_r0,
        "z_rD": report.z_rD,
        "w_mean": report.w_mean,
        "w_var": report.w_var,
        "w_lag1": report.w_lag1,
    }


_REPLICA_RUNNERS: Dict[str, Callable[[ReplicaTask], Dict[str, Any]]] = {
    "consistency": _consistency_fields,
    "error_validation": _error_validation_fields,
    "correlation_sweep": _correlation_sweep_fields,
    "stationarity_check": _stationarity_fields,
}


def run_replica(task: ReplicaTask) -> StudyRecord:
    """Produce the record of one replica; numerical failures are recorded, not raised."""
    base = {
        "study": task.study,
        **task.model.as_flat_dict(),
        "horizon": task.horizon,
        "replica": task.replica,
        "seed": task.seed,
    }
    started = time.perf_counter()
    try:
        fields = _REPLICA_RUNNERS[task.study](task)
        status, reason = "ok", None
    except (DmdError, ValueError, ArithmeticError) as exc:
        fields, status, reason = {}, "failed", f"{type(exc).__name__}: {exc}"
        logger.debug(f"Replica {task.replica} at T={task.horizon} failed: {reason}")
    if task.record_wall_time:
        fields["wall_time_s"] = time.perf_counter() - started
    return StudyRecord(**base, status=status, failure_reason=reason, **fields)


class StudyService:
    """Service class for running and judging Monte Carlo studies."""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.processing_stats = {
            "total_studies": 0,
            "total_records": 0,
            "failed_records": 0,
            "total_processing_time": 0.0,
        }

    def _tasks(self, cfg: ExperimentConfig, models: Sequence[SignalObservationModel]) -> List[ReplicaTask]:
        return [
            ReplicaTask(
                study=cfg.study,
                model=model,
                horizon=horizon,
                replica=replica,
                seed=derive_replica_seed(cfg.master_seed, replica),
                block_mode=cfg.block_mode,
                drift_source=cfg.drift_source,
                record_wall_time=self.settings.RECORD_WALL_TIME,
                init=cfg.init,
                indeterminate_z=self.settings.INDETERMINATE_Z,
                batch_count=self.settings.BATCH_COUNT,
            )
            for model in models
            for horizon in cfg.horizons
            for replica in range(cfg.replicas)
        ]

    def _execute(self, tasks: List[ReplicaTask], workers: int) -> List[StudyRecord]:
        progress = dict(total=len(tasks), desc="replicas", unit="rep", disable=not sys.stderr.isatty())
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                records = list(tqdm(pool.map(run_replica, tasks, chunksize=max(1, len(tasks) // (4 * workers))), **progress))
        else:
            records = [run_replica(task) for task in tqdm(tasks, **progress)]

        failed = [record for record in records if record.status == "failed"]
        if failed:
            logger.warning(f"{len(failed)} of {len(records)} replicas failed (first: {failed[0].failure_reason})")
        self.processing_stats["total_records"] += len(records)
        self.processing_stats["failed_records"] += len(failed)
        return sorted(records, key=lambda record: record.sort_key)

    def _workers(self, cfg: ExperimentConfig, workers: Optional[int]) -> int:
        return workers or cfg.workers or self.settings.WORKERS

    @staticmethod
    def _require(cfg: ExperimentConfig, study: StudyKind) -> None:
        if cfg.study != study:
            raise DomainError(f"Expected a {study} config, got {cfg.study}")

    def run_consistency_study(self, cfg: ExperimentConfig, workers: Optional[int] = None) -> List[StudyRecord]:
        """Calibrate on (T, replica) paired trajectories and record V0 and sigma0 estimates."""
        self._require(cfg, "consistency")
        return self._execute(self._tasks(cfg, [cfg.model]), self._workers(cfg, workers))

    def run_error_validation(self, cfg: ExperimentConfig, workers: Optional[int] = None) -> List[StudyRecord]:
        """Theoretical error matrix against the Monte Carlo MSE matrix of the exact filter."""
        self._require(cfg, "error_validation")
        return self._execute(self._tasks(cfg, [cfg.model]), self._workers(cfg, workers))

    def run_correlation_sweep(self, cfg: ExperimentConfig, workers: Optional[int] = None) -> List[StudyRecord]:
        """Correction terms and second addendum over the noise-correlation grid."""
        self._require(cfg, "correlation_sweep")
        models = [cfg.model.with_rho(rho) for rho in cfg.rho_grid]
        return self._execute(self._tasks(cfg, models), self._workers(cfg, workers))

    def run_stationarity_check(self, cfg: ExperimentConfig, workers: Optional[int] = None) -> List[StudyRecord]:
        """Stationary-law and equivalence diagnostics on single signal trajectories."""
        self._require(cfg, "stationarity_check")
        return self._execute(self._tasks(cfg, [cfg.model]), self._workers(cfg, workers))

    def run(self, cfg: ExperimentConfig, workers: Optional[int] = None) -> StudyReport:
        """Run the configured study and judge its acceptance checks."""
        runners = {
            "consistency": (self.run_consistency_study, self.check_consistency),
            "error_validation": (self.run_error_validation, self.check_error_validation),
            "correlation_sweep": (self.run_correlation_sweep, self.check_correlation_sweep),
            "stationarity_check": (self.run_stationarity_check, self.check_stationarity),
        }
        run_records, judge = runners[cfg.study]
        start_time = time.time()
        logger.info(
            f"Starting {cfg.study} study: horizons={cfg.horizons}, replicas={cfg.replicas}, "
            f"master_seed={cfg.master_seed}"
        )
        records = run_records(cfg, workers)
        report = StudyReport(
            study=cfg.study,
            records=records,
            summary=self.summarise(cfg.study, records),
            checks=judge(cfg, records),
        )
        elapsed = time.time() - start_time
        self.processing_stats["total_studies"] += 1
        self.processing_stats["total_processing_time"] += elapsed
        logger.info(f"{report.summary_line()} ({elapsed:.2f}s)")
        return report

    @staticmethod
    def summarise(study: StudyKind, records: Sequence[StudyRecord]) -> List[Dict[str, Any]]:
        """Mean, median and standard deviation of the study metrics per (rho_w, horizon)."""
        frame = pd.DataFrame([record.model_dump() for record in records])
        if frame.empty:
            return []
        keys = ["rho_w", "horizon"]
        counts = frame.groupby(keys).agg(
            replicas=("replica", "size"),
            failed=("status", lambda s: int((s == "failed").sum())),
        )
        ok = frame[frame["status"] == "ok"]
        columns = [c for c in _SUMMARY_COLUMNS[study] if c in ok.columns and ok[c].notna().any()]
        if columns:
            grouped = ok.groupby(keys)[columns].agg(["mean", "median", "std"])
            grouped.columns = [f"{column}_{stat}" for column, stat in grouped.columns]
            counts = counts.join(grouped, how="left")
        counts = counts.reset_index().astype(object)
        counts = counts.where(pd.notna(counts), None)
        return counts.to_dict(orient="records")

    def _failure_check(self, records: Sequence[StudyRecord], max_fraction: float) -> StudyCheck:
        fraction = sum(1 for r in records if r.status == "failed") / max(len(records), 1)
        return StudyCheck(
            name="failed_replica_fraction",
            passed=fraction <= max_fraction,
            value=fraction,
            threshold=max_fraction,
        )

    @staticmethod
    def _consistency_targets(cfg: ExperimentConfig) -> Dict[str, float]:
        """Large-T limits of the V0 and sigma0^2 estimates.

        The full-ratio estimate converges to ``full_ratio_limit`` rather than V0;
        its sigma0^2 target exists only when that limit lies in (0, 2).
        """
        model = cfg.model
        if cfg.drift_source == "interpolation" or model.rho_w == 0.0:
            return {"v0_est": model.v0, "sigma0_sq_est": model.sigma0 ** 2}
        limit = full_ratio_limit(model)
        targets = {"v0_est": limit}
        if 0.0 < limit < 2.0:
            targets["sigma0_sq_est"] = effective_factor(limit) * stationary_variance(model.signal)
        return targets

    def check_consistency(self, cfg: ExperimentConfig, records: Sequence[StudyRecord]) -> List[StudyCheck]:
        checks: List[StudyCheck] = []
        if cfg.model.rho_w != 0.0:
            checks.append(self._failure_check(records, 0.5))
        targets = self._consistency_targets(cfg)
        t_min, t_max = cfg.horizons[0], cfg.horizons[-1]
        if cfg.drift_source == "full":
            longest = [r.v0_est for r in records if r.horizon == t_max and r.status == "ok"]
            if len(longest) >= 2:
                z = pooled_z(longest, targets["v0_est"])
                checks.append(
                    StudyCheck(
                        name=f"v0_est_bias_T{t_max}",
                        passed=abs(z) < self.settings.ACCEPTANCE_Z,
                        value=float(np.mean(longest)) - cfg.model.v0,
                        threshold=targets["v0_est"] - cfg.model.v0,
                        detail=f"mean full-ratio estimate is {z:+.2f} standard errors from its limit",
                    )
                )
        if len(cfg.horizons) < 2 or cfg.replicas < 10:
            return checks

        for column, target in targets.items():
            medians = [
                median_abs_error([getattr(r, column) for r in records if r.horizon == t and r.status == "ok"], target)
                for t in cfg.horizons
            ]
            monotone = all(later < earlier for earlier, later in zip(medians, medians[1:]))
            checks.append(
                StudyCheck(
                    name=f"{column}_median_error_decreasing",
                    passed=monotone,
                    value=medians[-1],
                    threshold=medians[0],
                    detail=", ".join(f"T={t}: {m:.4g}" for t, m in zip(cfg.horizons, medians)),
                )
            )
            if t_max >= 100 * t_min:
                ratio = medians[0] / medians[-1] if medians[-1] > 0 else math.inf
                checks.append(
                    StudyCheck(
                        name=f"{column}_median_error_shrink_factor",
                        passed=ratio >= self.settings.CONSISTENCY_FACTOR,
                        value=ratio,
                        threshold=self.settings.CONSISTENCY_FACTOR,
                        detail=f"T={t_min} -> T={t_max}",
                    )
                )
        return checks

    def check_error_validation(self, cfg: ExperimentConfig, records: Sequence[StudyRecord]) -> List[StudyCheck]:
        checks = [self._failure_check(records, 0.0)]
        limit = self.settings.ACCEPTANCE_Z
        for horizon in cfg.horizons:
            group = [r for r in records if r.horizon == horizon and r.status == "ok"]
            if not group:
                continue
            for entry in ("g11", "g12", "g22", "trace"):
                if len(group) >= 2:
                    z = pooled_z([getattr(r, f"{entry}_mc") for r in group], getattr(group[0], f"{entry}_theory"))
                else:
                    z = getattr(group[0], f"z_{entry}")
                checks.append(
                    StudyCheck(
                        name=f"{entry}_z_T{horizon}",
                        passed=abs(z) < limit,
                        value=z,
                        threshold=limit,
                    )
                )
        return checks

    def check_correlation_sweep(self, cfg: ExperimentConfig, records: Sequence[StudyRecord]) -> List[StudyCheck]:
        checks = [self._failure_check(records, 0.0)]
        limit = self.settings.ACCEPTANCE_Z
        scale = cfg.model.sigma * cfg.model.sigma0

        if cfg.replicas >= 2:
            for rho in cfg.rho_grid:
                group = [r for r in records if r.rho_w == rho and r.horizon == cfg.horizons[-1] and r.status == "ok"]
                if len(group) < 2:
                    continue
                z_values = {
                    "a_t": pooled_z([r.a_t for r in group], 0.0),
                    "b_t": pooled_z([r.b_t for r in group], 0.0),
                    "c_t": pooled_z([r.c_t for r in group], scale * rho),
                }
                worst = max(z_values, key=lambda name: abs(z_values[name]))
                checks.append(
                    StudyCheck(
                        name=f"correction_means_rho{rho:+g}",
                        passed=abs(z_values[worst]) < limit,
                        value=z_values[worst],
                        threshold=limit,
                        detail=f"largest |z| on {worst}",
                    )
                )

        if len(cfg.rho_grid) >= 2 and scale > 0.0:
            horizon = cfg.horizons[-1]
            means = []
            for rho in cfg.rho_grid:
                values = [r.c_t for r in records if r.rho_w == rho and r.horizon == horizon and r.status == "ok"]
                if values:
                    means.append((rho, float(np.mean(values))))
            if len(means) >= 2:
                fit = stats.linregress([m[0] for m in means], [m[1] for m in means])
                rel = abs(fit.slope - scale) / scale
                checks.append(
                    StudyCheck(
                        name=f"c_t_slope_T{horizon}",
                        passed=rel <= self.settings.SLOPE_RTOL,
                        value=float(fit.slope),
                        threshold=scale,
                        detail=f"relative deviation {rel:.3%}",
                    )
                )
        return checks

    def check_stationarity(self, cfg: ExperimentConfig, records: Sequence[StudyRecord]) -> List[StudyCheck]:
        checks = [self._failure_check(records, 0.0)]
        limit = self.settings.ACCEPTANCE_Z
        for horizon in cfg.horizons:
            group = [r for r in records if r.horizon == horizon and r.status == "ok"]
            if not group:
                continue
            worst = 0.0
            for r in group:
                root_t = math.sqrt(r.horizon)
                z_values = (
                    r.z_variance,
                    r.z_halves,
                    r.z_r0,
                    r.z_rD,
                    r.w_mean * root_t,
                    (r.w_var - 1.0) / math.sqrt(2.0 / r.horizon),
                    r.w_lag1 * root_t,
                )
                worst = max(worst, max(abs(z) for z in z_values))
            checks.append(
                StudyCheck(
                    name=f"stationarity_max_abs_z_T{horizon}",
                    passed=worst < limit,
                    value=worst,
                    threshold=limit,
                )
            )
        return checks


def run_study(cfg: ExperimentConfig, workers: Optional[int] = None, settings: Optional[Settings] = None) -> StudyReport:
    """Run the study named in ``cfg`` with a fresh service."""
    return StudyService(settings).run(cfg, workers=workers)
