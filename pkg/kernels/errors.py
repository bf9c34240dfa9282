"""
Exception hierarchy for matroid-kernels.

Every error raised on purpose by the library derives from KernelsError.
Contract violations also derive from ValueError (and bounds errors from
IndexError) so callers that only know the builtin types still catch them.
"""
from __future__ import annotations

from typing import Optional


class KernelsError(Exception):
    """Root of all library errors."""


class ContractError(KernelsError, ValueError):
    """A documented precondition was violated by the caller."""


class BoundsError(ContractError, IndexError):
    """A row or column index lies outside the matrix."""


class UnknownLabelError(KernelsError, KeyError):
    """A label is not part of the ground set or vertex set."""

    def __str__(self) -> str:
        # KeyError quotes its argument; keep the message readable.
        return str(self.args[0]) if self.args else "unknown label"


class ConfigurationError(KernelsError):
    """Field or run configuration is unusable (bad prime, prime too small)."""


class FormatError(KernelsError, ValueError):
    """An input file does not follow its text format."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.path = path
        self.line = line

    def __str__(self) -> str:
        where = self.path or "<input>"
        if self.line is not None:
            return f"{where}:{self.line}: {self.message}"
        return f"{where}: {self.message}"


class UncuttableError(KernelsError):
    """Sources reach sinks through undeletable vertices only."""


class DegenerateRepresentationError(KernelsError):
    """A randomized representation kept an unexpected rank after all retries."""


class BudgetExceededError(KernelsError):
    """An exhaustive routine was asked to work beyond its hard caps."""
