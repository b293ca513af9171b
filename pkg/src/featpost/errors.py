"""Typed exceptions raised across the package.

File-format problems get their own class per failure mode so callers (and
the CLI exit-code mapping) can tell them apart without string matching.
"""


class FeatpostError(Exception):
    """Base class for every package-specific error."""


class ValidationError(FeatpostError, ValueError):
    """An argument or input array violates a documented precondition."""


class ConvergenceError(FeatpostError, RuntimeError):
    """The iterative eigensolver did not reach the requested tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PartitionOverflowError(FeatpostError, OverflowError):
    """The partition function is too large for a plain float; request the log value."""


class FileFormatError(FeatpostError):
    """Base class for file parsing and serialization failures."""


class BadMagicError(FileFormatError):
    """The file does not start with the expected magic bytes."""


class UnsupportedVersionError(FileFormatError):
    """The file declares a format version this build does not understand."""


class TruncatedPayloadError(FileFormatError):
    """The payload size does not match what the header declares."""


class NonFiniteDataError(FileFormatError):
    """A NaN or infinity was found in a payload; the message carries its position."""


class InvalidModelError(FileFormatError):
    """A model file decodes but violates the model invariants."""


class MalformedTextError(FileFormatError):
    """A CSV or label file violates the expected layout; the message carries the line."""
