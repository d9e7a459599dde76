"""Median and quantile approximation for Hölder-class densities under
deterministic, randomized and simulated-quantum query models."""

from .errors import CatalogError, ConfigError, DomainError, FitError, InvariantError
from .holder import (
    CATALOG_NAMES,
    Density,
    HolderParams,
    builtin_catalog,
    reference_median,
    reference_quantile,
    verify_membership,
)
from .integrate import Setting, integrate_det, integrate_mc
from .median import Criterion, median_bisection, perturbed_bisection
from .quantiles import QuantileRequest, quantiles_bisect, quantiles_ivp_det
from .quantum import QuerySimState, integrate_quantum, qae_sample, qmean

__version__ = "0.1.0"

__all__ = [
    "CatalogError",
    "ConfigError",
    "DomainError",
    "FitError",
    "InvariantError",
    "CATALOG_NAMES",
    "Density",
    "HolderParams",
    "builtin_catalog",
    "reference_median",
    "reference_quantile",
    "verify_membership",
    "Setting",
    "integrate_det",
    "integrate_mc",
    "Criterion",
    "median_bisection",
    "perturbed_bisection",
    "QuantileRequest",
    "quantiles_bisect",
    "quantiles_ivp_det",
    "QuerySimState",
    "integrate_quantum",
    "qae_sample",
    "qmean",
]
