"""Exceptions raised by the conditional density estimators."""

from __future__ import annotations

from typing import Optional


class ConditionalDensityError(Exception):
    """Base class for every error raised by this package."""


class ArgumentError(ConditionalDensityError, ValueError):
    """An operation received an invalid argument."""


class DomainError(ConditionalDensityError, ValueError):
    """A density was queried outside the region where it is defined."""


class EstimationError(ConditionalDensityError):
    """The data do not allow the requested estimate (e.g. zero spread)."""


class ConfigurationError(ConditionalDensityError):
    """A configuration object or grid is invalid or empty."""


class EvaluationError(ConditionalDensityError):
    """Risk evaluation met non-finite values."""


class UsageError(ConditionalDensityError):
    """The command line was used incorrectly."""


class ReplicationError(ConditionalDensityError):
    """A Monte Carlo replication failed; the whole cell is aborted."""

    def __init__(self, replication: int, seed: int, reason: Optional[str] = None):
        """Initialize the replication error."""
        self.replication = replication
        self.seed = seed
        message = f"Replication {replication} (seed {seed}) failed"
        if reason:
            message = f"{message}: {reason}"
        super().__init__(message)
