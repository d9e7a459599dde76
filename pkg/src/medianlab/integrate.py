"""Deterministic and randomized integration of Hölder-class densities.

Both oracles share a piecewise polynomial interpolant built from values of
``f`` at ``r + 1`` equispaced nodes per subinterval (the midpoint when
``r = 0``).  The deterministic rule integrates the interpolant; the
randomized rule additionally estimates the residual ``f - p`` by Monte Carlo
and boosts confidence with a median over repetitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import DomainError
from .holder import Density, HolderParams


class Setting(str, Enum):
    DETERMINISTIC = "det"
    RANDOMIZED = "rand"
    QUANTUM = "quant"

    @classmethod
    def parse(cls, value: "str | Setting") -> "Setting":
        if isinstance(value, Setting):
            return value
        aliases = {"deterministic": "det", "randomized": "rand", "quantum": "quant"}
        try:
            return cls(aliases.get(value, value))
        except ValueError:
            raise DomainError(f"unknown setting {value!r}") from None


@dataclass(frozen=True)
class IntegralOracle:
    """Describes an integration oracle's target accuracy and confidence."""

    setting: Setting
    target_eps: float
    target_delta: float | None
    params: HolderParams


# --------------------------------------------------------------------------
# reference-element helpers


@lru_cache(maxsize=None)
def reference_nodes(r: int) -> np.ndarray:
    """Interpolation nodes on [0, 1] for degree ``r``."""
    if r == 0:
        return np.array([0.5])
    return np.linspace(0.0, 1.0, r + 1)


@lru_cache(maxsize=None)
def reference_weights(r: int) -> np.ndarray:
    """Weights integrating degree-``r`` polynomials exactly on [0, 1]."""
    t = reference_nodes(r)
    V = np.vander(t, r + 1, increasing=True).T
    moments = 1.0 / np.arange(1, r + 2)
    return np.linalg.solve(V, moments)


def lagrange_basis(r: int, t: np.ndarray) -> np.ndarray:
    """Matrix ``L[i, j] = l_j(t_i)`` for the reference nodes."""
    nodes = reference_nodes(r)
    t = np.asarray(t, dtype=float)
    L = np.ones((t.size, nodes.size))
    for j, tj in enumerate(nodes):
        for m, tm in enumerate(nodes):
            if m != j:
                L[:, j] *= (t - tm) / (tj - tm)
    return L


@lru_cache(maxsize=None)
def lebesgue_constant(r: int) -> float:
    if r == 0:
        return 1.0
    t = np.linspace(0.0, 1.0, 20001)
    lam = float(np.max(np.abs(lagrange_basis(r, t)).sum(axis=1)))
    return lam * (1 + 1e-3)


def interp_const(params: HolderParams) -> float:
    """C with sup |f - p| <= C h^(r+rho) on a subinterval of width h.

    Taylor expansion about the subinterval centre leaves a remainder bounded
    by H (h/2)^(r+rho) / r!; interpolation amplifies it by at most the
    Lebesgue constant.  For r = 0 the node is the centre itself.
    """
    r, s = params.r, params.smoothness
    factor = 1.0 if r == 0 else (1.0 + lebesgue_constant(r)) / math.factorial(r)
    return factor * params.H / 2.0**s


def residual_bound(params: HolderParams, h: float) -> float:
    return interp_const(params) * h**params.smoothness


# --------------------------------------------------------------------------
# piecewise interpolant


class PiecewiseInterpolant:
    """Piecewise degree-r interpolant of ``f`` on ``n`` equal subintervals."""

    def __init__(self, a: float, b: float, n: int, r: int, values: np.ndarray) -> None:
        self.a, self.b, self.n, self.r = a, b, n, r
        self.h = (b - a) / n
        self.values = values  # shape (n, r + 1)

    @classmethod
    def build(cls, d: Density, a: float, b: float, n: int) -> "PiecewiseInterpolant":
        r = d.params.r
        h = (b - a) / n
        if r == 0:
            vals = d.eval_many(a + (np.arange(n) + 0.5) * h).reshape(n, 1)
        else:
            # shared endpoints are queried once
            grid = a + np.arange(n * r + 1) * (h / r)
            grid[-1] = b
            flat = d.eval_many(grid)
            idx = np.arange(n)[:, None] * r + np.arange(r + 1)[None, :]
            vals = flat[idx]
        return cls(a, b, n, r, vals)

    def integral(self) -> float:
        return float(self.h * np.sum(self.values @ reference_weights(self.r)))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k = np.clip(np.floor((x - self.a) / self.h).astype(int), 0, self.n - 1)
        t = (x - self.a) / self.h - k
        L = lagrange_basis(self.r, t.ravel())
        return np.sum(L * self.values[k.ravel()], axis=1).reshape(x.shape)


def _check_interval(a: float, b: float) -> None:
    if not (0.0 <= a <= b <= 1.0):
        raise DomainError(f"need 0 <= a <= b <= 1, got a={a}, b={b}")


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 0.5:
        raise DomainError(f"delta must lie in (0, 1/2), got {delta}")


# --------------------------------------------------------------------------
# deterministic

CHUNK = 1 << 20


def integrate_det(d: Density, a: float, b: float, n: int) -> float:
    """Composite interpolatory quadrature with ``n`` subintervals."""
    _check_interval(a, b)
    if n < 1 or int(n) != n:
        raise DomainError(f"subinterval count must be a positive integer, got {n}")
    if a == b:
        return 0.0
    n = int(n)
    if n <= CHUNK:
        return PiecewiseInterpolant.build(d, a, b, n).integral()
    # bounded memory for very fine partitions
    h = (b - a) / n
    total = 0.0
    for start in range(0, n, CHUNK):
        stop = min(n, start + CHUNK)
        lo = a + start * h
        hi = b if stop == n else a + stop * h
        total += PiecewiseInterpolant.build(d, lo, hi, stop - start).integral()
    return total


def det_budget(eps: float, params: HolderParams, length: float, c_det: float | None = None) -> int:
    """Smallest n with c_det * length^(1+s) / n^s <= eps."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    if length <= 0:
        return 1
    c = interp_const(params) if c_det is None else c_det
    s = params.smoothness

    def err(n: int) -> float:
        return c * length ** (1 + s) / n**s

    n = max(1, math.ceil((c * length ** (1 + s) / eps) ** (1.0 / s)))
    if n >= 2**52:
        return n  # beyond float resolution; the closed form is already tight
    while n > 1 and err(n - 1) <= eps:
        n -= 1
    while err(n) > eps:
        n += 1
    return n


# --------------------------------------------------------------------------
# randomized

#: Hoeffding constant: the median of K repetitions, each failing with
#: probability <= 1/4, fails with probability <= exp(-K / 8).
MEDIAN_REPS_PER_LOG = 8.0


def median_repetitions(delta: float, per_log: float = MEDIAN_REPS_PER_LOG) -> int:
    return max(1, math.ceil(per_log * math.log(1.0 / delta)))


def mc_plan(eps: float, params: HolderParams, length: float) -> tuple[int, int]:
    """(n subintervals, m Monte Carlo samples per repetition)."""
    s = params.smoothness
    c = interp_const(params)
    n = max(1, math.ceil((2.0 * c * length ** (1 + s) / eps) ** (1.0 / (s + 0.5))))
    R = c * (length / n) ** s
    # Chebyshev: std of the residual estimate <= eps / 2
    m = max(1, math.ceil(4.0 * (length * R) ** 2 / eps**2))
    return n, m


def integrate_mc(
    d: Density,
    a: float,
    b: float,
    eps: float,
    delta: float,
    rng: np.random.Generator,
) -> float:
    """Randomized integral, within ``eps`` with probability >= 1 - delta."""
    _check_interval(a, b)
    _check_delta(delta)
    if eps <= 0:
        raise DomainError("eps must be positive")
    if a == b:
        return 0.0
    length = b - a
    n, m = mc_plan(eps, d.params, length)
    K = median_repetitions(delta)
    p = PiecewiseInterpolant.build(d, a, b, n)
    u = a + length * rng.random((K, m))
    resid = d.eval_many(u.ravel()) - p(u.ravel())
    estimates = length * resid.reshape(K, m).mean(axis=1)
    return p.integral() + float(np.median(np.sort(estimates)))
