"""Services Package

This package contains the service layer of the toolkit: Monte Carlo study
orchestration and CSV/JSON input/output.
"""

from .study_service import StudyService, run_study

__all__ = [
    "StudyService",
    "run_study",
]
