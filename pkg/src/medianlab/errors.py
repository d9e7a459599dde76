"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class CatalogError(LookupError):
    """Unknown density name."""


class InvariantError(RuntimeError):
    """An internal guarantee was violated (indicates a construction bug)."""


class ConfigError(ValueError):
    """Invalid sweep configuration."""


class FitError(ValueError):
    """Not enough data to fit a scaling exponent."""
