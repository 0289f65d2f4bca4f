"""
Exception hierarchy shared by the numerical layers, the sampler and the CLI.
"""
from typing import List, Optional, Sequence


class QMMError(Exception):
    """Base class for all package errors."""


class DomainError(QMMError, ValueError):
    """An argument lies outside the domain of a function or distribution."""


class SchemaError(QMMError):
    """Input data does not follow the dataset CSV schema."""

    def __init__(self, message: str, rows: Optional[Sequence[int]] = None):
        """
        Initialize the schema error.

        Args:
            message: Human-readable description of the violation
            rows: 1-based data row numbers that violate the schema
        """
        self.rows: List[int] = list(rows or [])
        if self.rows:
            shown = ", ".join(str(r) for r in self.rows[:20])
            more = "" if len(self.rows) <= 20 else f" (+{len(self.rows) - 20} more)"
            message = f"{message} [rows: {shown}{more}]"
        super().__init__(message)


class NumericError(QMMError):
    """A log density evaluated to NaN."""

    def __init__(self, message: str, component: Optional[str] = None):
        self.component = component
        if component:
            message = f"{message} (component: {component})"
        super().__init__(message)


class InitializationError(QMMError):
    """No starting point with a finite log posterior could be found."""

    def __init__(self, message: str, component: Optional[str] = None):
        self.component = component
        if component:
            message = f"{message} (offending component: {component})"
        super().__init__(message)


class DiagnosticError(QMMError):
    """A convergence diagnostic is undefined for the supplied draws."""


class ZeroVarianceError(DiagnosticError):
    """All draws of a parameter are identical, so R-hat/ESS are undefined."""
