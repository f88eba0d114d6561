"""Custom exceptions for tor-height."""

from __future__ import annotations

from typing import Any, Optional


class TorHeightError(Exception):
    """Base exception for tor-height."""

    exit_code = 1

    def __init__(self, message: str, *, stage: Optional[str] = None) -> None:
        super().__init__(message)
        self.stage = stage

    def to_dict(self) -> dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": str(self),
            "stage": self.stage,
        }


class InvalidArgumentError(TorHeightError, ValueError):
    """Raised when an input violates the precondition of an operation."""

    pass


class ConfigurationError(TorHeightError):
    """Raised when configuration is missing or invalid."""

    pass


class SingularModelError(TorHeightError):
    """Raised when a Weierstrass model has zero discriminant."""

    pass


class BadReductionError(TorHeightError):
    """Raised when a prime divides the discriminant of the p-integral model."""

    pass


class UnsupportedPrimeError(TorHeightError):
    """Raised for primes below 5 where a_p = 0 is not used as the supersingular test."""

    pass


class CMCurveError(TorHeightError):
    """Raised when a CM curve reaches the Elkies search."""

    pass


class PrecisionExhaustedError(TorHeightError):
    """Raised when ball arithmetic cannot certify a result within the precision cap."""

    exit_code = 2


class EffortExhaustedError(TorHeightError):
    """Raised when a scan reaches its effort cap."""

    exit_code = 2


class ModulusOverflowError(TorHeightError):
    """Raised when the congruence modulus exceeds the configured bit cap."""

    exit_code = 2


class ExtractionIncompleteError(TorHeightError):
    """Raised when no certified supersingular factor of N_ell is found within effort."""

    exit_code = 2

    def __init__(self, message: str, *, cofactor: int, stage: Optional[str] = None) -> None:
        super().__init__(message, stage=stage)
        self.cofactor = cofactor

    def to_dict(self) -> dict[str, Any]:
        payload = super().to_dict()
        payload["cofactor_digits"] = len(str(self.cofactor))
        return payload


class SearchInfeasibleError(TorHeightError):
    """Raised when the threshold n makes the prime search impossible at desk scale."""

    exit_code = 2

    def __init__(self, message: str, *, log_bound: Any, stage: Optional[str] = None) -> None:
        super().__init__(message, stage=stage)
        self.log_bound = log_bound

    def to_dict(self) -> dict[str, Any]:
        payload = super().to_dict()
        payload["log_bound"] = self.log_bound.to_json()
        return payload
