"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: validation problems (bad data,
bad files, mismatched class lists) exit 3, numeric aborts exit 4.
"""

from __future__ import annotations


class DuprgError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(DuprgError):
    """A value violates one of its declared invariants."""


class ClassMismatchError(ValidationError):
    """Class-name lists of two values disagree in content or order."""


class FormatError(DuprgError):
    """A file does not conform to the DUPR/DUPC binary layout."""


class BadMagicError(FormatError):
    """File does not start with the expected magic bytes."""


class UnsupportedVersionError(FormatError):
    """File declares a format version this reader does not understand."""


class TruncatedFileError(FormatError):
    """File ends before the declared payload is complete."""


class ZeroNormRowError(FormatError):
    """A row that must be normalizable has zero Euclidean norm."""


class NumericAbortError(DuprgError):
    """Training produced a non-finite parameter or loss value."""

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch
