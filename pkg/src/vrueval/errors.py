"""Exception types shared across the toolkit.

All of these map to CLI exit code 2 (data/contract errors); usage errors
are exit code 1 and are handled by the CLI layer itself.
"""

from __future__ import annotations


class VruEvalError(Exception):
    """Base class for all toolkit errors."""


class ParseError(VruEvalError):
    """A malformed annotation, label, or detection line.

    Carries file path and 1-based line number when known, so CLI output
    can point at the offending ``file:line``.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(prefix + message)


class ConversionError(VruEvalError):
    """Dataset or coordinate conversion failure (hard error, not a warning)."""


class ContractError(VruEvalError):
    """An operation was called with inputs violating its preconditions."""


class SchemaError(VruEvalError):
    """A structured input file (run records, manifest, class map) violates its schema."""
