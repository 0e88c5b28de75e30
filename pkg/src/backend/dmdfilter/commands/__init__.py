"""Command Package

This package contains the click commands of the ``dmdfilter`` CLI, grouped by
concern and mounted by ``dmdfilter.main``.
"""

from .filter_commands import covariances, error, estimate, filter_command
from .simulate_commands import fluctuations, simulate, simulate_pair_command
from .study_commands import study

__all__ = [
    "covariances",
    "error",
    "estimate",
    "filter_command",
    "fluctuations",
    "simulate",
    "simulate_pair_command",
    "study",
]
