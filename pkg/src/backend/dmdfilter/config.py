"""Configuration Settings

This module contains the runtime settings for the DMD filtering toolkit:
logging, default seeds, numerical tolerances and Monte Carlo acceptance
thresholds. Every value can be overridden with a ``DMD_``-prefixed environment
variable or a ``.env`` file.
"""

from functools import lru_cache
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # Application settings
    APP_NAME: str = "DMD Filtering Toolkit"
    VERSION: str = "1.1.0"

    # Logging
    LOG_LEVEL: str = Field(default="INFO")
    LOG_FILE: Optional[str] = Field(default=None)

    # Simulation
    DEFAULT_SEED: int = Field(default=0, ge=0)

    # Numerical tolerances
    SINGULAR_RTOL: float = Field(default=1e-12, gt=0)  # det <= rtol * m11**2 is singular
    RATIO_RTOL: float = Field(default=1e-10, gt=0)
    SYMMETRY_RTOL: float = Field(default=1e-10, gt=0)
    IDENTITY_ATOL: float = Field(default=1e-10, gt=0)
    GAMMA_ATOL: float = Field(default=1e-10, gt=0)

    # Monte Carlo acceptance
    INDETERMINATE_Z: float = Field(default=3.0, ge=0)
    ACCEPTANCE_Z: float = Field(default=5.0, gt=0)
    SLOPE_RTOL: float = Field(default=0.10, gt=0)
    CONSISTENCY_FACTOR: float = Field(default=3.0, gt=1)
    BATCH_COUNT: int = Field(default=50, ge=2)

    # Output
    CSV_SIGNIFICANT_DIGITS: int = Field(default=17, ge=1, le=17)
    RECORD_WALL_TIME: bool = Field(default=False)
    WORKERS: int = Field(default=1, ge=1)

    model_config = SettingsConfigDict(
        env_prefix="DMD_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    @property
    def float_format(self) -> str:
        """printf-style float format used for CSV output."""
        return f"%.{self.CSV_SIGNIFICANT_DIGITS}g"


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# Global settings instance
settings = get_settings()
