"""Exception hierarchy.

Errors that mean "the computation ran and the answer is no" derive from
:class:`VerifiedNegative`; the CLI maps those to exit code 2 and every other
:class:`BlenderLabError` to exit code 1.
"""

from __future__ import annotations

from typing import Any


class BlenderLabError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        out = {"error": type(self).__name__, "message": str(self)}
        for key, value in self.details.items():
            out[key] = _plain(value)
        return out


class VerifiedNegative(BlenderLabError):
    """A check completed and produced a negative, reportable verdict."""


class ShapeError(BlenderLabError):
    pass


class DomainError(BlenderLabError):
    """An input left a branch domain; ``details`` name the branch and stage."""


class SingularError(BlenderLabError):
    pass


class NotFoundError(BlenderLabError):
    pass


class DegenerateError(BlenderLabError):
    pass


class ResonanceError(BlenderLabError):
    pass


class UnsupportedError(BlenderLabError):
    pass


class PreconditionError(BlenderLabError):
    pass


class ConfigError(BlenderLabError):
    pass


class InconclusiveError(BlenderLabError):
    pass


class ConstructionError(VerifiedNegative):
    """A constructive step (disjointness, crossing, ...) failed."""


class SearchExhaustedError(VerifiedNegative):
    pass


class InfeasibleError(VerifiedNegative):
    pass


class ConeFailure(VerifiedNegative):
    """A cone was not mapped into itself; ``details`` carry a witness."""


def _plain(value: Any) -> Any:
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    try:
        return float(value)
    except (TypeError, ValueError):
        return repr(value)
