"""Error hierarchy for the DMD filtering toolkit.

Every error carries the process exit code the command-line interface reports
for it: 2 for numerical or domain failures, 3 for failed acceptance studies.
"""


class DmdError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 2


class DomainError(DmdError, ValueError):
    """A parameter lies outside the domain where the theory applies."""


class DegenerateProcessError(DomainError):
    """The process is degenerate for the requested operation (e.g. sigma = 0)."""


class TrajectoryLengthError(DomainError):
    """A trajectory is too short for the requested operation."""


class CovarianceConsistencyError(DomainError):
    """Covariance inputs violate an identity they must satisfy."""


class SingularMatrixError(DmdError, ArithmeticError):
    """A 2x2 covariance block is not invertible."""


class IndeterminateRatioError(DmdError, ArithmeticError):
    """A ratio estimate has a (statistically) vanishing denominator."""


class MissingNoiseError(DmdError, LookupError):
    """A trajectory does not carry the driving-noise records."""


class AcceptanceFailure(DmdError):
    """A study finished but at least one of its self-checks failed."""

    exit_code = 3
