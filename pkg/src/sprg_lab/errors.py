"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class SprgError(Exception):
    """Base class for all errors raised by sprg_lab."""


class ParameterError(SprgError, ValueError):
    """Inconsistent or out-of-range parameters.

    ``field`` names the offending parameter so front ends can report it.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ParameterTooLarge(ParameterError):
    pass


class DimensionError(SprgError, ValueError):
    pass


class MalformedForm(SprgError, ValueError):
    pass


class MappingViolation(SprgError):
    pass


class RankOverflow(SprgError):
    pass


class MalformedSeed(SprgError, ValueError):
    pass


class SerializationError(SprgError, ValueError):
    """Corrupt or truncated binary artifact; ``offset`` is the failing byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset
