"""Error types shared by the laboratory modules.

Every error carries a short machine-readable ``code`` (e.g. ``NEGATIVE_BETA``)
so the CLI can map it onto its exit-code contract.
"""

from __future__ import annotations

from typing import Any


class LabError(Exception):
    """Base class. ``code`` is stable and appears in JSON reports."""

    #: exit code used by the CLI when this error escapes a command
    exit_code = 1

    def __init__(self, code: str, message: str = "", payload: Any = None):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message
        self.payload = payload


class DomainError(LabError):
    """Input lies outside the mathematical domain of an operation."""

    exit_code = 2


class ParamError(DomainError):
    """Parameter tuple rejected (inadmissible, degenerate, out of range)."""


class QuadratureError(LabError):
    """A numerical evaluation could not be carried out."""
