"""Pytest configuration and shared fixtures for the DMD filtering toolkit tests.

This module provides common test fixtures and configuration for all test modules.
"""

import tempfile
from pathlib import Path
from typing import Generator

import numpy as np
import pytest

from dmdfilter.config import Settings
from dmdfilter.models.dmd_core import simulate_pair
from dmdfilter.schemas.params_schemas import DmdParams, SignalObservationModel
from dmdfilter.schemas.trajectory_schemas import PairedTrajectory
from dmdfilter.services.study_service import StudyService


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo runs with 10^5 or more steps")


@pytest.fixture
def test_settings() -> Settings:
    """Create test settings with debug logging and serial execution."""
    return Settings(LOG_LEVEL="DEBUG", WORKERS=1, RECORD_WALL_TIME=False)


@pytest.fixture
def signal_params() -> DmdParams:
    return DmdParams(v=0.4, sigma=1.0)


@pytest.fixture
def observation_params() -> DmdParams:
    return DmdParams(v=0.5, sigma=1.0)


@pytest.fixture
def correlated_model() -> SignalObservationModel:
    """Canonical model V0=0.4, V=0.5, sigma0=sigma=1, rho_w=0.6."""
    return SignalObservationModel.from_values(v0=0.4, sigma0=1.0, v=0.5, sigma=1.0, rho_w=0.6)


@pytest.fixture
def uncorrelated_model() -> SignalObservationModel:
    return SignalObservationModel.from_values(v0=0.4, sigma0=1.0, v=0.5, sigma=1.0, rho_w=0.0)


@pytest.fixture
def short_pair(correlated_model: SignalObservationModel) -> PairedTrajectory:
    """64-step correlated pair with noises, fixed seed."""
    return simulate_pair(correlated_model, 64, seed=11)


@pytest.fixture
def medium_pair(correlated_model: SignalObservationModel) -> PairedTrajectory:
    """20 000-step correlated pair with noises, fixed seed."""
    return simulate_pair(correlated_model, 20_000, seed=2024)


@pytest.fixture
def study_service(test_settings: Settings) -> StudyService:
    return StudyService(test_settings)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for testing."""
    with tempfile.TemporaryDirectory() as tmp:
        yield Path(tmp)


@pytest.fixture
def study_config_file(temp_dir: Path) -> Path:
    """Small consistency config in the key = value grammar."""
    path = temp_dir / "study.conf"
    path.write_text(
        "# small consistency study\n"
        "study = consistency\n"
        "v0 = 0.4\n"
        "sigma0 = 1.0\n"
        "v = 0.5\n"
        "sigma = 1.0\n"
        "rho_w = 0.6\n"
        "horizons = 2000, 500\n"
        "replicas = 3\n"
        "master_seed = 42\n",
        encoding="utf-8",
    )
    return path
