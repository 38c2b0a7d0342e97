#!/usr/bin/env python3
# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

"""Errors raised by the entropy estimator and goodness-of-fit test."""


class GGTestError(RuntimeError):
    """Base class for custom errors raised by this library."""


class DomainError(GGTestError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class ArityError(GGTestError, ValueError):
    """Raised when a sample is too small for the requested operation."""


class DuplicatePointError(GGTestError, ValueError):
    """Raised when a sample contains identical observations."""

    def __init__(self, indices: list[tuple[int, int]]):
        self.indices = indices
        shown = ", ".join(f"({i}, {j})" for i, j in indices[:10])
        more = f" and {len(indices) - 10} more" if len(indices) > 10 else ""
        self.message = f"duplicate points at row pairs {shown}{more}"
        super().__init__(self.message)


class DecompositionError(GGTestError, ValueError):
    """Raised when a scatter or covariance matrix is not positive definite."""


class InconsistentDensityError(GGTestError):
    """Raised when a density fails its normalization check."""


class ConfigurationError(GGTestError, ValueError):
    """Raised when simulation or experiment settings are invalid."""


class TableLookupError(GGTestError, LookupError):
    """Raised when a critical-value table does not match the requested test."""


class PreconditionError(GGTestError, ValueError):
    """Raised when a bound is requested without the facts it relies on."""


class DegenerateSampleError(GGTestError, ValueError):
    """Raised when a normality test receives constant data."""
