"""Pydantic schemas for empirical estimation.

Defines the time-averaged sample moments of a paired trajectory, the
noise-correlation correction terms and the result of a calibration run.
"""

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .matrix_schemas import FilterMatrix, kv_block

BlockMode = Literal["raw", "structured"]
DriftSource = Literal["interpolation", "full"]


class EmpiricalCov(BaseModel):
    """Time averages over k = 0..T-1 of the products entering the filter blocks."""

    model_config = ConfigDict(frozen=True)

    horizon: int = Field(..., ge=1, description="Number of summands T")
    r_ab: float
    r_ab0: float
    r_ba0: float
    r_abD: float
    r_b: float = Field(..., ge=0.0)
    r_b0: float
    r_bD: float = Field(..., ge=0.0)
    r_a: float = Field(..., ge=0.0)
    mean_alpha: float = Field(default=0.0, description="Sample mean of alpha (diagnostic)")
    mean_beta: float = Field(default=0.0, description="Sample mean of beta (diagnostic)")

    def to_kv_block(self) -> str:
        return kv_block(self.model_dump())

    def as_row(self) -> dict:
        return self.model_dump()


class Corrections(BaseModel):
    """Correction terms generated by correlated signal and observation noises."""

    model_config = ConfigDict(frozen=True)

    horizon: int = Field(..., ge=1)
    a_t: float = Field(..., description="sigma * mean(alpha(k) dW(k+1))")
    b_t: float = Field(..., description="sigma0 * mean(beta(k) dW0(k+1))")
    c_t: float = Field(..., description="mean(da db) - V V0 mean(a b)")
    noise_cross: float = Field(..., description="mean(dW(k+1) dW0(k+1))")
    c_t_as_printed: float = Field(..., description="-a_t - b_t + sigma sigma0 noise_cross")
    max_residual: float = Field(default=0.0, ge=0.0, description="Largest cross-moment identity residual")

    def to_kv_block(self) -> str:
        return kv_block(self.model_dump())

    def as_row(self) -> dict:
        return self.model_dump()


class Calibration(BaseModel):
    """Calibration phase output: empirical filter and the signal parameter estimates."""

    model_config = ConfigDict(frozen=True)

    empirical: EmpiricalCov
    phi: FilterMatrix
    drift_phi: FilterMatrix
    block_mode: BlockMode = "raw"
    drift_source: DriftSource = "interpolation"
    v0_est: float
    sigma0_sq_est: Optional[float] = Field(default=None, ge=0.0, description="None when V0 lies outside (0, 2)")
    sigma0_est: Optional[float] = Field(default=None, ge=0.0)
    r_alpha_est: float = Field(..., ge=0.0)

    def to_kv_block(self) -> str:
        values = {
            "horizon": self.empirical.horizon,
            "block_mode": self.block_mode,
            "drift_source": self.drift_source,
            "v0_est": self.v0_est,
            "sigma0_est": self.sigma0_est,
            "sigma0_sq_est": self.sigma0_sq_est,
            "r_alpha_est": self.r_alpha_est,
        }
        values.update(self.phi.as_dict())
        return kv_block(values)
