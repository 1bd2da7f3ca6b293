from __future__ import annotations

from typing import Any


class GibbsDiscoveryError(RuntimeError):
    """Base class for every error raised by the library."""


class ConfigError(GibbsDiscoveryError):
    """Raised when settings, flags or environment values are missing or inconsistent."""


class DomainError(GibbsDiscoveryError, ValueError):
    """Raised when an argument lies outside the domain of a function or distribution."""


class MethodError(GibbsDiscoveryError):
    """Raised when a numerical method is requested outside the region where it is reliable."""


class NumericalCancellationError(GibbsDiscoveryError):
    """Raised when a signed sum loses too many significant digits to be trusted."""

    def __init__(self, message: str, digits_lost: float) -> None:
        super().__init__(message)
        self.digits_lost = digits_lost


class SamplerError(GibbsDiscoveryError):
    """Raised when a random variate generator cannot produce a draw."""


class InvalidDiscoveryIndexError(GibbsDiscoveryError):
    """Raised when a posterior law is requested for a frequency l with no species."""


class UnsupportedPriorError(GibbsDiscoveryError):
    """Raised when an operation is not defined for the given prior kind."""


class DataValidationError(GibbsDiscoveryError):
    """Raised when a sample summary fails its consistency checks."""

    def __init__(self, message: str, report: Any = None) -> None:
        super().__init__(message)
        self.report = report


class ZeroDenominatorError(GibbsDiscoveryError, ZeroDivisionError):
    """Raised when a ratio metric has a vanishing denominator."""


class InfeasibleMomentsError(DomainError):
    """Raised when a moment sequence cannot belong to a distribution on [0, 1]."""
