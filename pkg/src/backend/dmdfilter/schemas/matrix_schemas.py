"""Pydantic schemas for 2x2 covariance blocks, filter and error matrices.

All matrices act on the pair (x(k), dx(k+1)). Entries are stored as named
floats; ``to_array`` / ``from_array`` convert to numpy for products.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


def kv_block(values: dict) -> str:
    """``key = value`` lines; None values are skipped and floats keep their repr."""
    lines = []
    for key, value in values.items():
        if value is None:
            continue
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"


class JointCov(BaseModel):
    """Joint covariances E[x^2], E[x(k) dx(k+1)] and E[dx(k+1)^2] of one process."""

    model_config = ConfigDict(frozen=True)

    r: float = Field(..., ge=0.0, description="E[x(k)^2]")
    r0: float = Field(..., description="E[x(k) dx(k+1)]")
    rD: float = Field(..., ge=0.0, description="E[dx(k+1)^2]")


class Cov2(BaseModel):
    """Symmetric 2x2 matrix [[m11, m12], [m12, m22]]."""

    model_config = ConfigDict(frozen=True)

    m11: float
    m12: float
    m22: float

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m12

    def to_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m12, self.m22]])

    @classmethod
    def from_array(cls, array: np.ndarray) -> "Cov2":
        """Build from a symmetric array; the off-diagonal is averaged."""
        array = np.asarray(array, dtype=float)
        return cls(
            m11=float(array[0, 0]),
            m12=float(0.5 * (array[0, 1] + array[1, 0])),
            m22=float(array[1, 1]),
        )


class CrossCov2(BaseModel):
    """General 2x2 cross-covariance block between signal and observation pairs.

    c11 = E[a(k) b(k)], c12 = E[a(k) db(k+1)], c21 = E[b(k) da(k+1)],
    c22 = E[da(k+1) db(k+1)].
    """

    model_config = ConfigDict(frozen=True)

    c11: float
    c12: float
    c21: float
    c22: float

    def to_array(self) -> np.ndarray:
        return np.array([[self.c11, self.c12], [self.c21, self.c22]])

    @classmethod
    def from_array(cls, array: np.ndarray) -> "CrossCov2":
        array = np.asarray(array, dtype=float)
        return cls(
            c11=float(array[0, 0]),
            c12=float(array[0, 1]),
            c21=float(array[1, 0]),
            c22=float(array[1, 1]),
        )


class FilterMatrix(BaseModel):
    """2x2 filtering operator mapping (b(k), db(k+1)) to (a_hat(k), da_hat(k+1))."""

    model_config = ConfigDict(frozen=True)

    phi11: float
    phi12: float
    phi21: float
    phi22: float

    def to_array(self) -> np.ndarray:
        return np.array([[self.phi11, self.phi12], [self.phi21, self.phi22]])

    @classmethod
    def from_array(cls, array: np.ndarray) -> "FilterMatrix":
        array = np.asarray(array, dtype=float)
        return cls(
            phi11=float(array[0, 0]),
            phi12=float(array[0, 1]),
            phi21=float(array[1, 0]),
            phi22=float(array[1, 1]),
        )

    @classmethod
    def zeros(cls) -> "FilterMatrix":
        return cls(phi11=0.0, phi12=0.0, phi21=0.0, phi22=0.0)

    def as_dict(self) -> dict:
        return self.model_dump()

    def to_kv_block(self) -> str:
        return kv_block(self.as_dict())


class GammaCoefficient(BaseModel):
    """Squared correlation R_ab**2 / (R_a R_b) between signal and observation."""

    model_config = ConfigDict(frozen=True)

    value: float = Field(..., ge=0.0, le=1.0)


class ErrorMatrix(BaseModel):
    """Filtering error covariance of (a(k) - a_hat(k), da(k+1) - da_hat(k+1))."""

    model_config = ConfigDict(frozen=True)

    g11: float
    g12: float
    g21: float
    g22: float

    @model_validator(mode="after")
    def _check_covariance(self) -> "ErrorMatrix":
        scale = max(1.0, abs(self.g11), abs(self.g22), abs(self.g12))
        if abs(self.g12 - self.g21) > 1e-10 * scale:
            raise ValueError(f"Error matrix is not symmetric: g12={self.g12}, g21={self.g21}")
        if self.g11 < -1e-10 * scale or self.g22 < -1e-10 * scale:
            raise ValueError(f"Error matrix has a negative diagonal: g11={self.g11}, g22={self.g22}")
        return self

    @property
    def trace(self) -> float:
        return self.g11 + self.g22

    def to_array(self) -> np.ndarray:
        return np.array([[self.g11, self.g12], [self.g21, self.g22]])

    @classmethod
    def from_array(cls, array: np.ndarray) -> "ErrorMatrix":
        array = np.asarray(array, dtype=float)
        return cls(
            g11=float(array[0, 0]),
            g12=float(array[0, 1]),
            g21=float(array[1, 0]),
            g22=float(array[1, 1]),
        )

    def to_csv_row(self, gamma_ab: float) -> dict:
        """Row for the ``g11,g12,g22,trace,gamma_ab`` report."""
        return {
            "g11": self.g11,
            "g12": self.g12,
            "g22": self.g22,
            "trace": self.trace,
            "gamma_ab": gamma_ab,
        }
