"""Shared exception types. Domain errors exit the CLI with code 1."""

from __future__ import annotations


class WebTriageError(Exception):
    """Base class for expected domain errors (bad files, bad config, ...)."""


class DatasetFormatError(WebTriageError):
    """A persisted file violates its format contract.

    Carries the offending line number (1-based) when one is known.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        if prefix:
            message = f"{prefix}: {message}"
        super().__init__(message)


class ConfigError(WebTriageError):
    """Service or training configuration is missing or inconsistent."""
