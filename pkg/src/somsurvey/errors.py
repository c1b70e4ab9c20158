"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: ``UsageError`` -> 1, ``DataError``
(and subclasses) -> 2, ``NumericError`` -> 3.
"""

from __future__ import annotations


class SomSurveyError(Exception):
    """Base class for all toolkit errors."""


class UsageError(SomSurveyError):
    """Bad configuration or invalid option combination."""


class DataError(SomSurveyError):
    """Input data violates a documented contract."""


class SchemaError(DataError):
    """Survey file does not match the declared column roles."""


class UnknownTokenError(DataError):
    """A response token is not covered by the encoding scheme."""

    def __init__(self, record_id: str, column: str, token: str):
        self.record_id = record_id
        self.column = column
        self.token = token
        super().__init__(
            f"unknown token {token!r} in column {column!r} of record {record_id!r}"
        )


class ImputeError(DataError):
    """A missing entry cannot be filled from the available neighbors."""


class NumericError(SomSurveyError):
    """Non-finite values or a failure of the numeric machinery."""
