"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: ``InputError`` subclasses exit with 1,
``ComputationError`` subclasses with 2.
"""

from __future__ import annotations


class LifeIndexError(Exception):
    """Base class for all package errors."""


class InputError(LifeIndexError):
    """Bad input documents, usage, or references (exit code 1)."""


class ComputationError(LifeIndexError):
    """Numerical, domain or constraint failure during evaluation (exit code 2)."""


class DomainError(ComputationError, ValueError):
    """An argument lies outside the domain of a formula."""


class SingularityError(DomainError):
    """A formula hits a pole (zero denominator)."""


class SeriesLookupError(ComputationError, LookupError):
    """A research series has no entry for the requested year."""

    def __init__(self, year: int, message: str | None = None):
        self.year = year
        super().__init__(message or f"research series has no entry for year {year}")


class ConstraintError(ComputationError):
    """An allocation violates, or cannot satisfy, a constraint."""

    def __init__(self, constraint: str, message: str):
        self.constraint = constraint
        super().__init__(f"{constraint}: {message}")


class NumericalError(ComputationError, ArithmeticError):
    """A solver produced a non-finite value."""


class ResourceLimitError(ComputationError):
    """A requested computation exceeds a configured size guard."""


class ParseError(InputError):
    """A document is not well-formed."""

    def __init__(self, path, message: str, line: int | None = None, column: int | None = None):
        self.path = path
        self.line = line
        self.column = column
        where = f"{path}"
        if line is not None:
            where += f":{line}:{column}"
        super().__init__(f"{where}: {message}")


class ValidationError(InputError):
    """A document parsed but violates the schema or type invariants.

    ``issues`` holds every problem found as ``(field_path, message)`` pairs.
    """

    def __init__(self, issues: list[tuple[str, str]], source=None):
        self.issues = list(issues)
        self.source = source
        head = f"{source}: " if source is not None else ""
        lines = "; ".join(f"{p}: {m}" for p, m in self.issues)
        super().__init__(f"{head}{len(self.issues)} validation issue(s): {lines}")


class ResolutionError(InputError):
    """A cross-file reference cannot be resolved."""

    def __init__(self, path, message: str | None = None):
        self.path = path
        super().__init__(message or f"referenced file not found: {path}")


class FileAccessError(InputError, OSError):
    """A file cannot be read or written."""

    def __init__(self, path, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class CoverageError(ComputationError, LookupError):
    """Profile data does not cover a requested year."""

    def __init__(self, year: int, message: str):
        self.year = year
        super().__init__(message)
