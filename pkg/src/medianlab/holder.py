"""Hölder-class densities on [0, 1] with query accounting.

A :class:`Density` exposes values of ``f`` and its derivatives up to order
``r``; every counted evaluation increments a thread-safe counter so solver
costs can be read off as counter deltas.  The catalog provides analytic test
densities with exact CDFs used as references.
"""

from __future__ import annotations

import dataclasses
import math
import re
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import CatalogError, DomainError

DerivFn = Callable[[np.ndarray, int], np.ndarray]

DEFAULT_D = 2.0
DEFAULT_H = 10.0
DEFAULT_GAMMA = 0.5


@dataclass(frozen=True)
class HolderParams:
    """Constants of the class F^{r,rho}: derivative bound D, Hölder constant H
    of the r-th derivative, and lower bound gamma (0 means no separation)."""

    r: int = 1
    rho: float = 1.0
    D: float = DEFAULT_D
    H: float = DEFAULT_H
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self) -> None:
        if int(self.r) != self.r or self.r < 0:
            raise DomainError(f"r must be a nonnegative integer, got {self.r}")
        if not 0.0 < self.rho <= 1.0:
            raise DomainError(f"rho must lie in (0, 1], got {self.rho}")
        if self.D <= 0 or self.H <= 0:
            raise DomainError("D and H must be positive")
        if self.gamma < 0:
            raise DomainError("gamma must be nonnegative")
        if self.gamma > self.D:
            raise DomainError("gamma cannot exceed D")

    @property
    def smoothness(self) -> float:
        """r + rho."""
        return self.r + self.rho

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


class QueryCounter:
    """Monotone counter safe to bump from several threads."""

    def __init__(self) -> None:
        self._value = 0
        self._lock = threading.Lock()

    def add(self, k: int = 1) -> None:
        with self._lock:
            self._value += k

    @property
    def value(self) -> int:
        return self._value


class Density:
    """An evaluable density f on [0, 1] together with f', ..., f^(r).

    ``derivs(x, j)`` must be vectorised over ``x``.  ``reference_cdf`` is only
    for checking results and never charged to the counter.
    """

    def __init__(
        self,
        params: HolderParams,
        derivs: DerivFn,
        reference_cdf: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        name: str = "custom",
    ) -> None:
        self.params = params
        self.name = name
        self._derivs = derivs
        self.reference_cdf = reference_cdf
        self.counter = QueryCounter()

    def __repr__(self) -> str:
        return f"Density({self.name!r}, {self.params})"

    @property
    def queries(self) -> int:
        return self.counter.value

    def fresh(self) -> "Density":
        """Same density with a new, zeroed counter."""
        return Density(self.params, self._derivs, self.reference_cdf, self.name)

    def _check(self, x: np.ndarray, j: int) -> None:
        if not 0 <= j <= self.params.r or int(j) != j:
            raise DomainError(f"derivative order {j} outside 0..{self.params.r}")
        if x.size and (np.min(x) < 0.0 or np.max(x) > 1.0 or np.isnan(x).any()):
            raise DomainError("evaluation point outside [0, 1]")

    def eval(self, x: float, j: int = 0) -> float:
        """f^(j)(x), charged one query."""
        arr = np.asarray([x], dtype=float)
        self._check(arr, j)
        self.counter.add(1)
        return float(self._derivs(arr, j)[0])

    def eval_many(self, xs, j: int = 0) -> np.ndarray:
        """Vectorised evaluation charged one query per point."""
        arr = np.asarray(xs, dtype=float).ravel()
        self._check(arr, j)
        self.counter.add(arr.size)
        return np.asarray(self._derivs(arr, j), dtype=float)

    def peek(self, xs, j: int = 0) -> np.ndarray:
        """Uncharged evaluation.

        Reserved for verification code and for the quantum simulator, whose
        superposed evaluations are paid for by counting oracle applications.
        """
        arr = np.asarray(xs, dtype=float).ravel()
        self._check(arr, j)
        return np.asarray(self._derivs(arr, j), dtype=float)

    def cdf(self, x) -> np.ndarray:
        if self.reference_cdf is None:
            raise DomainError(f"density {self.name!r} has no reference CDF")
        return np.asarray(self.reference_cdf(np.asarray(x, dtype=float)), dtype=float)


def eval_counted(d: Density, x: float, j: int = 0) -> float:
    return d.eval(x, j)


def reference_quantile(d: Density, alpha: float) -> float:
    """Solve F(x) = alpha on the reference CDF to ~1e-14."""
    if alpha <= 0.0:
        return 0.0
    if alpha >= 1.0:
        return 1.0
    g = lambda x: float(d.cdf(x)) - alpha  # noqa: E731
    return brentq(g, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def reference_median(d: Density) -> float:
    return reference_quantile(d, 0.5)


# --------------------------------------------------------------------------
# membership verification


@dataclass
class MembershipReport:
    is_density: bool
    is_holder: bool
    is_separated: bool
    max_violation: float
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.is_density and self.is_holder


def _gauss_integral(d: Density, cells: int = 256, order: int = 24) -> float:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, cells + 1)
    h = np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    pts = (mid[:, None] + 0.5 * h[:, None] * nodes[None, :]).ravel()
    vals = d.peek(pts).reshape(cells, order)
    return float(np.sum(vals @ weights * 0.5 * h))


def _holder_excess(x: np.ndarray, v: np.ndarray, rho: float) -> float:
    """max over pairs of a uniform grid of |v_i - v_j| / |x_i - x_j|^rho."""
    n = x.size
    if n < 2:
        return 0.0
    h = (x[-1] - x[0]) / (n - 1)
    if rho == 1.0:
        # a chord slope is an average of neighbouring slopes
        return float(np.max(np.abs(np.diff(v)))) / h
    best = 0.0
    for k in range(1, n):
        best = max(best, float(np.max(np.abs(v[k:] - v[:-k]))) / (k * h) ** rho)
    return best


def verify_membership(d: Density, grid_n: int = 4096, tol: float = 1e-8) -> MembershipReport:
    """Grid-based check of the class constraints declared in ``d.params``."""
    if grid_n < 2:
        raise DomainError("grid_n must be at least 2")
    p = d.params
    x = np.linspace(0.0, 1.0, grid_n)
    f0 = d.peek(x, 0)
    details: dict = {}

    deriv_excess = 0.0
    for j in range(p.r + 1):
        deriv_excess = max(deriv_excess, float(np.max(np.abs(d.peek(x, j)))) - p.D)
    details["derivative_excess"] = deriv_excess

    quotient = _holder_excess(x, d.peek(x, p.r), p.rho)
    details["holder_quotient"] = quotient
    holder_excess = quotient - p.H

    integral = _gauss_integral(d)
    details["integral"] = integral
    mass_err = abs(integral - 1.0)
    negativity = max(0.0, -float(np.min(f0)))
    details["min_value"] = float(np.min(f0))
    sep_gap = p.gamma - float(np.min(f0))

    is_density = mass_err <= tol and negativity <= tol
    is_holder = deriv_excess <= tol and holder_excess <= tol
    is_separated = p.gamma > 0 and sep_gap <= tol
    violations = [deriv_excess, holder_excess, mass_err, negativity]
    if p.gamma > 0:
        violations.append(sep_gap)
    return MembershipReport(
        is_density=is_density,
        is_holder=is_holder,
        is_separated=is_separated,
        max_violation=max(0.0, max(violations)),
        details=details,
    )


# --------------------------------------------------------------------------
# catalog


def _params(
    r: int, rho: float, D_needed: float, H_needed: float, min_f: float, exact_H: bool = False
) -> HolderParams:
    return HolderParams(
        r=r,
        rho=rho,
        D=max(DEFAULT_D, D_needed),
        H=H_needed if exact_H else max(DEFAULT_H, H_needed),
        gamma=max(0.0, min(DEFAULT_GAMMA, min_f)),
    )


def uniform(r: int = 1) -> Density:
    def derivs(x, j):
        return np.ones_like(x) if j == 0 else np.zeros_like(x)

    return Density(_params(r, 1.0, 1.0, 0.0, 1.0), derivs, lambda x: np.clip(x, 0.0, 1.0), "uniform")


def sine(a: float, r: int = 1) -> Density:
    """f = 1 + a sin(2 pi x), |a| < 1."""
    if not abs(a) < 1:
        raise DomainError("sine amplitude must satisfy |a| < 1")
    w = 2 * math.pi

    def derivs(x, j):
        if j == 0:
            return 1.0 + a * np.sin(w * x)
        return a * w**j * np.sin(w * x + j * math.pi / 2)

    def cdf(x):
        return x + a * (1.0 - np.cos(w * x)) / w

    D_needed = max([1 + abs(a)] + [abs(a) * w**j for j in range(1, r + 1)])
    H_needed = abs(a) * w ** (r + 1)
    return Density(_params(r, 1.0, D_needed, H_needed, 1 - abs(a)), derivs, cdf, f"sine-{a:g}")


def poly(k: int, r: int = 1) -> Density:
    """f = c (1 + x)^k normalised on [0, 1]."""
    if k < 0 or int(k) != k:
        raise DomainError("poly exponent must be a nonnegative integer")
    c = (k + 1) / (2.0 ** (k + 1) - 1.0)

    def coef(j):
        return c * math.perm(k, j) if j <= k else 0.0

    def derivs(x, j):
        if j > k:
            return np.zeros_like(x)
        return coef(j) * (1.0 + x) ** (k - j)

    def cdf(x):
        return ((1.0 + x) ** (k + 1) - 1.0) / (2.0 ** (k + 1) - 1.0)

    D_needed = max(coef(j) * 2.0 ** (k - j) for j in range(min(r, k) + 1))
    H_needed = coef(r + 1) * 2.0 ** (k - r - 1) if r + 1 <= k else 0.0
    return Density(_params(r, 1.0, D_needed, H_needed, c), derivs, cdf, f"poly-{k}")


def _falling(s: float, j: int) -> float:
    out = 1.0
    for i in range(j):
        out *= s - i
    return out


def cusp(s: float) -> Density:
    """f proportional to 1 + |x - 1/2|^s.

    The r-th derivative (r = ceil(s) - 1) is exactly Hölder with exponent
    s - r at x = 1/2, so the density sits on the boundary of its class.
    """
    if s <= 0:
        raise DomainError("cusp exponent must be positive")
    r = math.ceil(s) - 1
    rho = s - r
    Z = 1.0 + 2.0 * 0.5 ** (s + 1) / (s + 1)

    def derivs(x, j):
        t = x - 0.5
        out = _falling(s, j) * np.abs(t) ** (s - j) * np.sign(t) ** j / Z
        if j == 0:
            out = out + 1.0 / Z
        return out

    def cdf(x):
        t = x - 0.5
        return (x + (np.sign(t) * np.abs(t) ** (s + 1) + 0.5 ** (s + 1)) / (s + 1)) / Z

    D_needed = max([(1 + 0.5**s) / Z] + [_falling(s, j) * 0.5 ** (s - j) / Z for j in range(1, r + 1)])
    H_needed = _falling(s, r) * (2.0 ** (1 - rho) if r % 2 else 1.0) / Z
    # the exact Hölder constant keeps the density on the class boundary
    return Density(
        _params(r, rho, D_needed, H_needed, 1.0 / Z, exact_H=True), derivs, cdf, f"cusp-{s:g}"
    )


CATALOG_NAMES = ("uniform", "sine-0.5", "sine-0.9", "poly-2", "cusp-0.5", "cusp-1.5")

_NAME_RE = re.compile(r"^(uniform|sine|poly|cusp)(?:-([-+0-9.eE]+))?$")


def builtin_catalog(name: str, r: Optional[int] = None, **overrides) -> Density:
    """Look up a catalog density by name.

    Names: ``uniform``, ``sine-A`` (|A| < 1), ``poly-K``, ``cusp-S``.  ``r``
    selects the smoothness order for the smooth families; ``overrides``
    replace individual class constants (D, H, gamma).
    """
    m = _NAME_RE.match(name.strip())
    if not m:
        raise CatalogError(f"unknown density {name!r}")
    family, arg = m.group(1), m.group(2)
    try:
        if family == "uniform":
            if arg is not None:
                raise CatalogError(f"unknown density {name!r}")
            d = uniform(1 if r is None else r)
        elif family == "sine":
            d = sine(float(arg), 1 if r is None else r)
        elif family == "poly":
            d = poly(int(arg), 1 if r is None else r)
        else:
            if r is not None:
                raise DomainError("cusp densities fix their own smoothness")
            d = cusp(float(arg))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise CatalogError(f"bad parameter in density name {name!r}") from exc
    if overrides:
        d = Density(dataclasses.replace(d.params, **overrides), d._derivs, d.reference_cdf, d.name)
    return d
