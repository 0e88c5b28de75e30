"""Pydantic Schemas Package

This package contains the validated domain types of the toolkit: process
parameters, trajectories, covariance blocks, estimation results and study
records.
"""

from .estimation_schemas import BlockMode, Calibration, Corrections, DriftSource, EmpiricalCov
from .matrix_schemas import Cov2, CrossCov2, ErrorMatrix, FilterMatrix, GammaCoefficient, JointCov
from .params_schemas import DmdParams, FixedInit, InitMode, SignalObservationModel, StationaryInit
from .study_schemas import ExperimentConfig, StudyCheck, StudyKind, StudyRecord, StudyReport
from .trajectory_schemas import FilterEstimates, PairedTrajectory, StationaryLaw, Trajectory

__all__ = [
    "BlockMode",
    "Calibration",
    "Corrections",
    "Cov2",
    "CrossCov2",
    "DmdParams",
    "DriftSource",
    "EmpiricalCov",
    "ErrorMatrix",
    "ExperimentConfig",
    "FilterEstimates",
    "FilterMatrix",
    "FixedInit",
    "GammaCoefficient",
    "InitMode",
    "JointCov",
    "PairedTrajectory",
    "SignalObservationModel",
    "StationaryInit",
    "StationaryLaw",
    "StudyCheck",
    "StudyKind",
    "StudyRecord",
    "StudyReport",
    "Trajectory",
]
