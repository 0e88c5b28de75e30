"""Pydantic schemas for Monte Carlo experiment studies.

Defines the study configuration (parsed from ``key = value`` files), the flat
per-replica record and the self-judging study report.
"""

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .estimation_schemas import BlockMode, DriftSource
from .params_schemas import FixedInit, InitMode, SignalObservationModel, StationaryInit

StudyKind = Literal["consistency", "error_validation", "correlation_sweep", "stationarity_check"]

_MODEL_KEYS = ("v0", "sigma0", "v", "sigma", "rho_w")
_INIT_KEYS = ("x0", "burn_in")


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


class ExperimentConfig(BaseModel):
    """Configuration of one study run."""

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    model: SignalObservationModel
    horizons: List[int] = Field(..., min_length=1, description="Horizons T, each >= 2")
    replicas: int = Field(default=1, ge=1)
    master_seed: int = Field(default=0, ge=0)
    study: StudyKind = "consistency"
    output_path: Optional[str] = Field(default=None, alias="out")
    rho_grid: List[float] = Field(default_factory=lambda: [-0.6, 0.0, 0.6])
    drift_source: DriftSource = "interpolation"
    block_mode: BlockMode = "raw"
    workers: Optional[int] = Field(default=None, ge=1)
    init: InitMode = Field(default_factory=StationaryInit, discriminator="kind")

    @model_validator(mode="before")
    @classmethod
    def _fold_model_keys(cls, data: Any) -> Any:
        if isinstance(data, dict) and "model" not in data:
            flat = {key: data[key] for key in _MODEL_KEYS if key in data}
            data = {key: value for key, value in data.items() if key not in _MODEL_KEYS}
            data["model"] = SignalObservationModel.from_values(
                v0=float(flat.get("v0", 0.4)),
                sigma0=float(flat.get("sigma0", 1.0)),
                v=float(flat.get("v", 0.5)),
                sigma=float(flat.get("sigma", 1.0)),
                rho_w=float(flat.get("rho_w", 0.0)),
            )
        return data

    @model_validator(mode="before")
    @classmethod
    def _fold_init_keys(cls, data: Any) -> Any:
        if not isinstance(data, dict) or not isinstance(data.get("init", ""), str):
            return data
        data = dict(data)
        kind = str(data.pop("init", "")).strip().lower()
        extra = {key: data.pop(key) for key in _INIT_KEYS if key in data}
        if kind == "fixed" or (not kind and extra):
            data["init"] = FixedInit(**extra)
        elif kind in ("", "stationary"):
            if extra:
                raise ValueError("x0 and burn_in apply only to init = fixed")
            data["init"] = StationaryInit()
        else:
            raise ValueError(f"init must be stationary or fixed, got {kind!r}")
        return data

    @field_validator("horizons", "rho_grid", mode="before")
    @classmethod
    def _split_comma_lists(cls, v: Any) -> Any:
        return _split_list(v)

    @field_validator("study", mode="before")
    @classmethod
    def _normalise_study(cls, v: Any) -> Any:
        if isinstance(v, str):
            return v.strip().lower().replace("-", "_")
        return v

    @field_validator("horizons")
    @classmethod
    def _check_horizons(cls, v: List[int]) -> List[int]:
        if any(t < 2 for t in v):
            raise ValueError("every horizon must be at least 2")
        return sorted(set(v))

    @field_validator("rho_grid")
    @classmethod
    def _check_rho_grid(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("rho_grid must not be empty")
        if any(not -1.0 <= rho <= 1.0 for rho in v):
            raise ValueError("rho_grid values must lie in [-1, 1]")
        return sorted(set(v))


class StudyRecord(BaseModel):
    """One (study, rho, T, replica) outcome; reproducible from its seed and model echo."""

    model_config = ConfigDict(frozen=True)

    study: StudyKind
    v0: float
    sigma0: float
    v: float
    sigma: float
    rho_w: float
    horizon: int
    replica: int
    seed: int
    status: Literal["ok", "failed"] = "ok"
    failure_reason: Optional[str] = None

    # calibration
    v0_est: Optional[float] = None
    sigma0_est: Optional[float] = None
    sigma0_sq_est: Optional[float] = None
    r_alpha_est: Optional[float] = None
    phi11: Optional[float] = None
    phi12: Optional[float] = None
    phi21: Optional[float] = None
    phi22: Optional[float] = None

    # error validation
    gamma_ab: Optional[float] = None
    g11_theory: Optional[float] = None
    g12_theory: Optional[float] = None
    g22_theory: Optional[float] = None
    trace_theory: Optional[float] = None
    g11_mc: Optional[float] = None
    g12_mc: Optional[float] = None
    g22_mc: Optional[float] = None
    trace_mc: Optional[float] = None
    z_g11: Optional[float] = None
    z_g12: Optional[float] = None
    z_g22: Optional[float] = None
    z_trace: Optional[float] = None

    # correlation sweep
    a_t: Optional[float] = None
    b_t: Optional[float] = None
    c_t: Optional[float] = None
    s11: Optional[float] = None
    s12: Optional[float] = None
    s21: Optional[float] = None
    s22: Optional[float] = None

    # stationarity check
    r_hat: Optional[float] = None
    z_variance: Optional[float] = None
    z_halves: Optional[float] = None
    z_r0: Optional[float] = None
    z_rD: Optional[float] = None
    w_mean: Optional[float] = None
    w_var: Optional[float] = None
    w_lag1: Optional[float] = None

    wall_time_s: Optional[float] = None

    @property
    def sort_key(self) -> tuple:
        return (self.study, self.rho_w, self.horizon, self.replica)


class StudyCheck(BaseModel):
    """One self-judging acceptance check of a study."""

    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


class StudyReport(BaseModel):
    """Records, per-group summary rows and acceptance checks of one study."""

    model_config = ConfigDict(frozen=True)

    study: StudyKind
    records: List[StudyRecord]
    summary: List[Dict[str, Any]] = Field(default_factory=list)
    checks: List[StudyCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed_replicas(self) -> int:
        return sum(1 for record in self.records if record.status == "failed")

    def summary_line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        n_passed = sum(1 for check in self.checks if check.passed)
        return (
            f"{verdict} {self.study}: {n_passed}/{len(self.checks)} checks passed, "
            f"{len(self.records)} records, {self.failed_replicas} failed replicas"
        )
