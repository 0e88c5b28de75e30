"""Pydantic schemas for process parameters.

Defines the parameters of a single discrete Markov diffusion, the joint
signal/observation model and the initialisation modes of the simulators.
"""

from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field


class DmdParams(BaseModel):
    """Drift V and noise intensity sigma of one DMD.

    The drift is restricted to the open interval (0, 2): the stationary
    variance sigma**2 / (2V - V**2) does not exist at the endpoints.
    """

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    v: float = Field(..., gt=0.0, lt=2.0, description="Drift coefficient (regression rate per step)")
    sigma: float = Field(default=1.0, ge=0.0, description="Noise intensity per step")


class SignalObservationModel(BaseModel):
    """Signal DMD, observation DMD and the correlation of their driving noises."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    signal: DmdParams = Field(..., description="Signal parameters (V0, sigma0)")
    observation: DmdParams = Field(..., description="Observation parameters (V, sigma)")
    rho_w: float = Field(
        default=0.0,
        ge=-1.0,
        le=1.0,
        description="Per-step correlation of (dW0(k+1), dW(k+1))",
    )

    @classmethod
    def from_values(
        cls,
        v0: float,
        sigma0: float,
        v: float,
        sigma: float,
        rho_w: float = 0.0,
    ) -> "SignalObservationModel":
        """Build a model from the five flat parameters."""
        return cls(
            signal=DmdParams(v=v0, sigma=sigma0),
            observation=DmdParams(v=v, sigma=sigma),
            rho_w=rho_w,
        )

    @property
    def v0(self) -> float:
        return self.signal.v

    @property
    def sigma0(self) -> float:
        return self.signal.sigma

    @property
    def v(self) -> float:
        return self.observation.v

    @property
    def sigma(self) -> float:
        return self.observation.sigma

    @property
    def noise_covariance(self) -> float:
        """Contemporaneous covariance sigma * sigma0 * rho_w of the scaled noises."""
        return self.sigma * self.sigma0 * self.rho_w

    def with_rho(self, rho_w: float) -> "SignalObservationModel":
        """Copy of this model with another noise correlation."""
        return SignalObservationModel(signal=self.signal, observation=self.observation, rho_w=rho_w)

    def as_flat_dict(self) -> dict:
        return {
            "v0": self.v0,
            "sigma0": self.sigma0,
            "v": self.v,
            "sigma": self.sigma,
            "rho_w": self.rho_w,
        }


class StationaryInit(BaseModel):
    """Draw the initial state from the exact stationary law."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["stationary"] = "stationary"


class FixedInit(BaseModel):
    """Start from a fixed state, optionally discarding a burn-in prefix."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: Literal["fixed"] = "fixed"
    x0: float = Field(default=0.0, description="Initial state")
    burn_in: int = Field(default=0, ge=0, description="Simulated steps dropped before recording")


InitMode = Union[StationaryInit, FixedInit]
