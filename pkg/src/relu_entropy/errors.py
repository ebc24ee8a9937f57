"""Structured exceptions shared across the package."""

from __future__ import annotations


class LabError(Exception):
    """Base class. Carries a message plus a structured keyword payload."""

    def __init__(self, message: str, **payload):
        super().__init__(message)
        self.payload = dict(payload)
        for key, val in payload.items():
            setattr(self, key, val)


class DimensionError(LabError):
    """Shape mismatch; the payload names the offending layer or argument."""


class DomainError(LabError):
    """A value lies outside the admissible domain of an operation."""


class PreconditionError(LabError):
    """A documented precondition was violated."""


class ResourceError(LabError):
    """An enumeration or grid would exceed the configured budget.

    For enumeration the payload carries the exact count that would have
    been produced (``count``) next to the budget that stopped it.
    """


class SolverError(LabError):
    """A root finder could not bracket or converge."""
