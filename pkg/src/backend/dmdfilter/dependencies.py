"""Common Dependencies

This module contains helpers shared by the services and the command layer:
settings access, per-replica seed derivation and loading of ``key = value``
study configuration files.
"""

import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np
from dotenv import dotenv_values
from pydantic import ValidationError

from .config import Settings, get_settings
from .exceptions import DomainError
from .schemas.params_schemas import SignalObservationModel
from .schemas.study_schemas import ExperimentConfig

logger = logging.getLogger(__name__)

CONFIG_KEYS = frozenset(
    {
        "v0",
        "sigma0",
        "v",
        "sigma",
        "rho_w",
        "horizons",
        "replicas",
        "master_seed",
        "study",
        "out",
        "rho_grid",
        "drift_source",
        "block_mode",
        "workers",
        "init",
        "x0",
        "burn_in",
    }
)

_SEED_MASK = (1 << 63) - 1


def get_app_settings() -> Settings:
    """Dependency to get the cached settings instance."""
    return get_settings()


def derive_replica_seed(master_seed: int, replica_index: int) -> int:
    """Deterministic 63-bit seed of one replica.

    The master seed is the SeedSequence entropy and the replica index its spawn
    key, so seeds of different replicas are statistically independent and do not
    depend on execution order.
    """
    if master_seed < 0 or replica_index < 0:
        raise DomainError("master_seed and replica_index must be non-negative")
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=(replica_index,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0]) & _SEED_MASK


def read_config_values(path: Union[str, Path]) -> Dict[str, str]:
    """Parse a ``key = value`` file; ``#`` starts a comment.

    Raises:
        DomainError: If the file is missing, a key is unknown or has no value.
    """
    path = Path(path)
    if not path.is_file():
        raise DomainError(f"Config file not found: {path}")
    raw = dotenv_values(path, interpolate=False)

    unknown = sorted(key for key in raw if key not in CONFIG_KEYS)
    if unknown:
        raise DomainError(f"Unknown config keys in {path}: {', '.join(unknown)}")
    missing = sorted(key for key, value in raw.items() if value is None or value == "")
    if missing:
        raise DomainError(f"Config keys without a value in {path}: {', '.join(missing)}")
    return {key: value for key, value in raw.items() if value is not None}


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate a study configuration file."""
    values = read_config_values(path)
    if "horizons" not in values:
        raise DomainError(f"Config file {path} does not define horizons")
    config = ExperimentConfig.model_validate(values)
    logger.info(
        f"Loaded {config.study} config from {path}: horizons={config.horizons}, "
        f"replicas={config.replicas}, master_seed={config.master_seed}"
    )
    return config


def build_model(v0: float, sigma0: float, v: float, sigma: float, rho_w: float = 0.0) -> SignalObservationModel:
    """Validated signal/observation model; validation failures become domain errors."""
    try:
        return SignalObservationModel.from_values(v0=v0, sigma0=sigma0, v=v, sigma=sigma, rho_w=rho_w)
    except ValidationError as exc:
        raise DomainError(f"Invalid model parameters: {exc.errors()[0]['msg']}") from exc
