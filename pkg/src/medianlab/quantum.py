"""Classical simulation of quantum-query mean estimation and integration.

Amplitude estimation is simulated by sampling its closed-form outcome
distribution; a round with ``M`` Grover applications is charged ``M``
queries.  Integration uses main-part separation: a classical interpolant
absorbs most of ``f`` and the bounded residual is encoded as an amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvariantError
from .holder import Density
from .integrate import (
    PiecewiseInterpolant,
    _check_delta,
    _check_interval,
    interp_const,
    lagrange_basis,
)

#: Probability that one amplitude-estimation round lands within its bound.
QAE_SUCCESS = 8.0 / math.pi**2

#: Largest grid the simulator will tabulate for one residual mean.
MAX_GRID = 1 << 23


@dataclass
class QuerySimState:
    queries_used: int = 0
    rng: np.random.Generator = field(default_factory=np.random.default_rng)


def _sinpi(x: np.ndarray) -> np.ndarray:
    # exact zeros at integers
    k = np.round(x)
    return np.where(k % 2 == 0, 1.0, -1.0) * np.sin(np.pi * (x - k))


def qae_pmf(a: float, M: int) -> np.ndarray:
    """Outcome distribution of M-query amplitude estimation on amplitude ``a``.

    Outcome ``y`` is read as ``sin^2(pi y / M)``.  Only the ``+theta``
    eigenphase is tabulated; the ``-theta`` branch maps ``y`` to ``M - y``,
    which yields the same estimate, so the law of the estimate is unchanged.
    """
    if M < 1 or int(M) != M:
        raise DomainError(f"M must be a positive integer, got {M}")
    if not 0.0 <= a <= 1.0:
        raise DomainError(f"amplitude must lie in [0, 1], got {a}")
    theta = math.asin(math.sqrt(a)) / math.pi
    y = np.arange(M)
    delta = theta - y / M
    num = _sinpi(M * delta)
    den = M * _sinpi(delta)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(den == 0.0, 1.0, (num / np.where(den == 0.0, 1.0, den)) ** 2)
    return p


def qae_estimates(M: int) -> np.ndarray:
    return np.sin(np.pi * np.arange(M) / M) ** 2


def qae_samples(a: float, M: int, size: int, state: QuerySimState) -> np.ndarray:
    """``size`` independent rounds, each charged ``M`` queries."""
    p = qae_pmf(a, M)
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    y = np.searchsorted(cdf, state.rng.random(size), side="right")
    y = np.minimum(y, M - 1)
    state.queries_used += int(M) * int(size)
    return np.sin(np.pi * y / M) ** 2


def qae_sample(a: float, M: int, state: QuerySimState) -> float:
    return float(qae_samples(a, M, 1, state)[0])


def qae_error_bound(a: float, M: int) -> float:
    return 2 * math.pi * math.sqrt(a * (1 - a)) / M + math.pi**2 / M**2


def qae_size(eps: float) -> int:
    """Smallest power of two M whose worst-case error bound is <= eps."""
    M = 1
    while qae_error_bound(0.5, M) > eps:
        M *= 2
    return M


def qae_rounds(delta: float) -> int:
    # Hoeffding for the median of rounds that each succeed w.p. >= 8/pi^2
    rate = 2.0 * (QAE_SUCCESS - 0.5) ** 2
    return max(1, math.ceil(math.log(1.0 / delta) / rate))


def qmean(g, eps: float, delta: float, state: QuerySimState) -> float:
    """Mean of a [0, 1]-valued sequence, within eps w.p. >= 1 - delta.

    Falls back to exact summation (N queries) whenever amplitude estimation
    would need at least N queries.
    """
    _check_delta(delta)
    if eps <= 0:
        raise DomainError("eps must be positive")
    g = np.asarray(g, dtype=float).ravel()
    N = g.size
    if N < 1:
        raise DomainError("empty sequence")
    M = qae_size(eps)
    K = qae_rounds(delta)
    if M * K >= N:
        state.queries_used += N
        return math.fsum(g) / N
    a = math.fsum(g) / N  # simulator-internal: fixes the amplitude
    a = min(1.0, max(0.0, a))
    return float(np.median(qae_samples(a, M, K, state)))


def _derivative_spread(r: int) -> float:
    """max_t sum_j |l_j'(t)| for the reference interpolation basis."""
    if r == 0:
        return 0.0
    t = np.linspace(0.0, 1.0, 4001)
    h = 1e-6
    dL = (lagrange_basis(r, np.clip(t + h, 0, 1)) - lagrange_basis(r, np.clip(t - h, 0, 1)))
    width = np.clip(t + h, 0, 1) - np.clip(t - h, 0, 1)
    return float(np.max(np.abs(dL / width[:, None]).sum(axis=1))) * (1 + 1e-3)


def _grid_cells(d: Density, length: float, n: int, eps: float) -> int:
    """Fine cells per subinterval keeping the midpoint discretisation error
    of the residual mean below eps / 4."""
    p = d.params
    h = length / n
    if p.r == 0:
        w = 2.0 * (eps / (4.0 * length * p.H)) ** (1.0 / p.rho)
    else:
        lip = p.D * (1.0 + 0.5 * _derivative_spread(p.r))
        w = eps / (length * lip)
    return max(1, math.ceil(h / w))


def quantum_plan(eps: float, d: Density, length: float, delta: float) -> int:
    """Subinterval count balancing n classical queries against the
    K * M ~ K * 4 pi C length^(1+s) / (eps n^s) amplitude-estimation queries."""
    s = d.params.smoothness
    c = interp_const(d.params)
    K = qae_rounds(delta)
    scale = s * K * 4.0 * math.pi * c * length ** (1 + s) / eps
    return max(1, math.ceil(scale ** (1.0 / (s + 1))))


def integrate_quantum(
    d: Density,
    a: float,
    b: float,
    eps: float,
    delta: float,
    state: QuerySimState,
) -> float:
    """Integral of ``f`` over [a, b] within eps w.p. >= 1 - delta.

    Classical interpolant queries go through ``d``'s counter; amplitude
    estimation queries go to ``state.queries_used``.
    """
    _check_interval(a, b)
    _check_delta(delta)
    if eps <= 0:
        raise DomainError("eps must be positive")
    if a == b:
        return 0.0
    length = b - a
    n = quantum_plan(eps, d, length, delta)
    p = PiecewiseInterpolant.build(d, a, b, n)
    R = interp_const(d.params) * (length / n) ** d.params.smoothness
    eps_q = eps / (4.0 * R * length)
    if eps_q >= 0.5:
        # residual integral is already below eps / 2
        return p.integral()

    m = _grid_cells(d, length, n, eps)
    N = n * m
    if N > MAX_GRID:
        raise DomainError(f"residual grid of {N} points exceeds simulator limit")
    x = a + (np.arange(N) + 0.5) * (length / N)
    u = (d.peek(x) - p(x)) / (2.0 * R) + 0.5
    lo, hi = float(np.min(u)), float(np.max(u))
    if lo < -1e-12 or hi > 1 + 1e-12:
        raise InvariantError(
            f"residual escaped its bound: u in [{lo:.3g}, {hi:.3g}] with R={R:.3g}"
        )
    np.clip(u, 0.0, 1.0, out=u)
    mean_u = qmean(u, eps_q, delta, state)
    return p.integral() + length * 2.0 * R * (mean_u - 0.5)
