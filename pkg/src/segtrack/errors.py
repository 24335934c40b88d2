"""Exception hierarchy shared by every module of the toolkit."""

from __future__ import annotations


class SegtrackError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(SegtrackError, ValueError):
    """An input violates a declared invariant.

    Attributes:
        invariant: Short name of the violated invariant (e.g. ``"run-sum"``).
        record: Index of the offending record in its file, when known.
        frame_index: Frame of the offending record, when known.
    """

    def __init__(self, message, *, invariant=None, record=None, frame_index=None):
        context = []
        if record is not None:
            context.append(f"record={record}")
        if frame_index is not None:
            context.append(f"frame={frame_index}")
        if invariant is not None:
            context.append(f"invariant={invariant}")
        if context:
            message = f"{message} ({', '.join(context)})"
        super().__init__(message)
        self.invariant = invariant
        self.record = record
        self.frame_index = frame_index


class DimensionError(ValidationError):
    """Masks or grids with incompatible or non-positive dimensions."""


class RleFormatError(ValidationError):
    """Run list inconsistent with the declared mask dimensions."""


class ParseError(ValidationError):
    """A file could not be parsed into the expected layout."""


class ConfigError(ValidationError):
    """A configuration value is outside its admissible range."""
