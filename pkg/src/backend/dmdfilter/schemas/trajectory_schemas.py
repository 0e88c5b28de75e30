"""Pydantic schemas for trajectories and filter outputs.

Trajectories hold read-only numpy arrays; they are immutable after creation
and safe to share between threads.
"""

from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..exceptions import DomainError, TrajectoryLengthError

_INCREMENT_RTOL = 1e-12


def _frozen_array(value: Any) -> np.ndarray:
    array = np.array(value, dtype=float, copy=True).reshape(-1)
    array.flags.writeable = False
    return array


class Trajectory(BaseModel):
    """States zeta(0..T), increments dzeta(1..T) and optionally the noises dW(1..T).

    Increments must equal the differences of consecutive states up to round-off.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray
    increments: np.ndarray
    noises: Optional[np.ndarray] = None

    @field_validator("values", "increments", mode="before")
    @classmethod
    def _as_array(cls, v: Any) -> np.ndarray:
        return _frozen_array(v)

    @field_validator("noises", mode="before")
    @classmethod
    def _as_optional_array(cls, v: Any) -> Optional[np.ndarray]:
        return None if v is None else _frozen_array(v)

    @model_validator(mode="after")
    def _check_consistency(self) -> "Trajectory":
        if self.values.size < 1:
            raise TrajectoryLengthError("A trajectory needs at least one state")
        if self.increments.size != self.values.size - 1:
            raise TrajectoryLengthError(
                f"Expected {self.values.size - 1} increments, got {self.increments.size}"
            )
        if self.noises is not None and self.noises.size != self.increments.size:
            raise TrajectoryLengthError(
                f"Expected {self.increments.size} noise records, got {self.noises.size}"
            )
        scale = max(1.0, float(np.max(np.abs(self.values))))
        mismatch = np.abs(self.increments - np.diff(self.values))
        if mismatch.size and not np.all(mismatch <= _INCREMENT_RTOL * scale):
            k = int(np.argmax(mismatch > _INCREMENT_RTOL * scale))
            raise DomainError(
                f"Increment {k + 1} is {self.increments[k]!r} but the states differ by "
                f"{self.values[k + 1] - self.values[k]!r}"
            )
        return self

    @classmethod
    def from_values(cls, values: Any, noises: Any = None) -> "Trajectory":
        """Build a trajectory whose increments are the exact differences of ``values``."""
        values = np.asarray(values, dtype=float)
        return cls(values=values, increments=np.diff(values), noises=noises)

    @property
    def steps(self) -> int:
        """Number of transitions T."""
        return int(self.increments.size)

    @property
    def has_noises(self) -> bool:
        return self.noises is not None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        if self.has_noises != other.has_noises:
            return False
        same_noises = not self.has_noises or np.array_equal(self.noises, other.noises)
        return (
            np.array_equal(self.values, other.values)
            and np.array_equal(self.increments, other.increments)
            and same_noises
        )


class PairedTrajectory(BaseModel):
    """Aligned signal (alpha) and observation (beta) trajectories."""

    model_config = ConfigDict(frozen=True)

    alpha: Trajectory
    beta: Trajectory

    @model_validator(mode="after")
    def _check_alignment(self) -> "PairedTrajectory":
        if self.alpha.values.size != self.beta.values.size:
            raise TrajectoryLengthError(
                f"Signal has {self.alpha.values.size} states, observation has {self.beta.values.size}"
            )
        return self

    @property
    def steps(self) -> int:
        return self.alpha.steps

    @property
    def has_noises(self) -> bool:
        return self.alpha.has_noises and self.beta.has_noises

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PairedTrajectory):
            return NotImplemented
        return self.alpha == other.alpha and self.beta == other.beta


class StationaryLaw(BaseModel):
    """Stationary variance R and effective factor 2V - V**2 of a DMD."""

    model_config = ConfigDict(frozen=True)

    variance: float = Field(..., ge=0.0)
    eff_factor: float = Field(..., gt=0.0, le=1.0)


class FilterEstimates(BaseModel):
    """Filter output: alpha_hat(k) and d_alpha_hat(k+1) for k = 0..T-1."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha_hat: np.ndarray
    d_alpha_hat: np.ndarray

    @field_validator("alpha_hat", "d_alpha_hat", mode="before")
    @classmethod
    def _as_array(cls, v: Any) -> np.ndarray:
        return _frozen_array(v)

    @model_validator(mode="after")
    def _check_lengths(self) -> "FilterEstimates":
        if self.alpha_hat.size != self.d_alpha_hat.size:
            raise TrajectoryLengthError("Estimate components must have equal length")
        return self

    @property
    def steps(self) -> int:
        return int(self.alpha_hat.size)
