"""Quantile vectors by repeated bisection or by integrating the inverse CDF.

The inverse CDF ``z = F^{-1}`` solves the autonomous problem
``z'(y) = 1 / f(z(y))``, ``z(0) = 0``.  The IVP route marches it with a
Taylor method of order ``r + 1`` whose coefficients come from the derivative
values ``f(z), ..., f^(r)(z)`` at the start of each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InvariantError
from .holder import Density
from .integrate import Setting
from .median import absolute_bound, delta_budget, perturbed_bisection


@dataclass
class QuantileRequest:
    alpha: Sequence[float]
    eps: float
    setting: Setting = Setting.DETERMINISTIC

    def __post_init__(self) -> None:
        alpha = [float(a) for a in self.alpha]
        if not alpha:
            raise DomainError("need at least one quantile level")
        if any(not 0.0 <= a <= 1.0 for a in alpha):
            raise DomainError("quantile levels must lie in [0, 1]")
        if not 0.0 < self.eps < 0.5:
            raise DomainError(f"eps must lie in (0, 1/2), got {self.eps}")
        self.alpha = sorted(alpha)
        self.setting = Setting.parse(self.setting)

    @property
    def k(self) -> int:
        return len(self.alpha)


@dataclass
class QuantileResult:
    alpha: list
    xi_hat: list
    method: str
    setting: Setting
    eps: float
    total_queries: int
    per_quantile_queries: list = field(default_factory=list)
    steps: Optional[int] = None
    monotone_repaired: bool = False

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "xi_hat": self.xi_hat,
            "method": self.method,
            "setting": self.setting.value,
            "eps": self.eps,
            "cost": {
                "total": self.total_queries,
                "per_quantile": self.per_quantile_queries,
                "steps": self.steps,
            },
            "monotone_repaired": self.monotone_repaired,
        }


def _enforce_sorted(xi: np.ndarray, eps: float, strict: bool) -> tuple[np.ndarray, bool]:
    fixed = np.maximum.accumulate(xi)
    worst = float(np.max(fixed - xi)) if xi.size else 0.0
    if strict and worst > eps:
        raise InvariantError(f"quantile estimates out of order by {worst:.3g} > eps")
    return fixed, worst > 0


def quantiles_bisect(
    d: Density, req: QuantileRequest, rng: Optional[np.random.Generator] = None
) -> QuantileResult:
    """One perturbed bisection per level; confidence split evenly over levels."""
    if d.params.gamma <= 0:
        raise DomainError("quantile approximation needs a density bounded below (gamma > 0)")
    if rng is None:
        rng = np.random.default_rng()
    live = [a for a in req.alpha if 0.0 < a < 1.0]
    delta = delta_budget(req.setting, req.eps)
    if delta is not None and live:
        delta /= len(live)
    xi, costs = [], []
    for a in req.alpha:
        if a <= 0.0 or a >= 1.0:
            xi.append(float(a))
            costs.append(0)
            continue
        res = perturbed_bisection(d, a, req.eps, req.setting, rng, delta=delta)
        xi.append(res.xi_hat)
        costs.append(res.queries)
    arr, repaired = _enforce_sorted(
        np.asarray(xi), req.eps, strict=req.setting is Setting.DETERMINISTIC
    )
    return QuantileResult(
        alpha=list(req.alpha),
        xi_hat=arr.tolist(),
        method="bisect",
        setting=req.setting,
        eps=req.eps,
        total_queries=int(sum(costs)),
        per_quantile_queries=costs,
        monotone_repaired=repaired,
    )


# --------------------------------------------------------------------------
# Taylor IVP route


def reciprocal_series(a: np.ndarray) -> np.ndarray:
    """Taylor coefficients of 1/g from those of g (a[0] != 0)."""
    b = np.zeros_like(a)
    b[0] = 1.0 / a[0]
    for j in range(1, a.size):
        b[j] = -b[0] * np.dot(a[1 : j + 1], b[j - 1 :: -1][:j])
    return b


def inverse_cdf_taylor(f_derivs: np.ndarray) -> np.ndarray:
    """Taylor coefficients z_1..z_{r+1} of z with z' = 1/f(z) at one point.

    ``f_derivs[j] = f^(j)(z0)`` for j = 0..r.
    """
    r = f_derivs.size - 1
    a = f_derivs / np.array([math.factorial(j) for j in range(r + 1)])
    phi = reciprocal_series(a)  # coefficients of 1/f around z0
    z = np.zeros(r + 2)  # z[0] is the offset (kept zero)
    for k in range(r + 1):
        # coefficient of t^k in sum_j phi_j (z(t) - z0)^j
        w_k = phi[0] if k == 0 else 0.0
        power = np.zeros(k + 1)
        power[0] = 1.0
        for j in range(1, k + 1):
            power = np.convolve(power, z[: k + 1])[: k + 1]
            w_k += phi[j] * power[k]
        z[k + 1] = w_k / (k + 1)
    return z[1:]


def _march(d: Density, steps: int, alpha: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run the Taylor method; return z at the step nodes and at ``alpha``."""
    r = d.params.r
    h = 1.0 / steps
    nodes = np.empty(steps + 1)
    nodes[0] = 0.0
    out = np.empty(alpha.size)
    order = np.argsort(alpha)
    ai = 0
    z0 = 0.0
    for k in range(steps):
        y0 = k * h
        zc = min(1.0, max(0.0, z0))
        derivs = np.array([d.eval(zc, j) for j in range(r + 1)])
        coef = inverse_cdf_taylor(derivs)
        powers = np.arange(1, r + 2)
        y1 = 1.0 if k == steps - 1 else (k + 1) * h
        while ai < alpha.size and alpha[order[ai]] <= y1:
            t = alpha[order[ai]] - y0
            out[order[ai]] = z0 + np.dot(coef, t**powers)
            ai += 1
        z0 = z0 + np.dot(coef, (y1 - y0) ** powers)
        nodes[k + 1] = z0
    return nodes, np.clip(out, 0.0, 1.0)


def ivp_error_target(d: Density, eps: float) -> float:
    return eps / 2.0


def quantiles_ivp_det(
    d: Density,
    req: QuantileRequest,
    steps: Optional[int] = None,
    max_doublings: int = 24,
) -> QuantileResult:
    """Quantiles from the inverse-CDF IVP, deterministic setting.

    With ``steps`` given the march uses that fixed step count.  Otherwise it
    starts at ceil(eps^(-1/(r+rho))) steps and doubles until the Richardson
    estimate of the fine solution's error (on the step nodes and the
    requested levels) is at most eps / 2.
    """
    if d.params.gamma <= 0:
        raise DomainError("the inverse-CDF IVP needs gamma > 0 (1/f unbounded otherwise)")
    if req.setting is not Setting.DETERMINISTIC:
        raise DomainError("the IVP route is deterministic only")
    alpha = np.asarray(req.alpha, dtype=float)
    q0 = d.queries
    s = d.params.smoothness
    if steps is not None:
        if steps < 1:
            raise DomainError("steps must be positive")
        _, xi = _march(d, int(steps), alpha)
        used = int(steps)
    else:
        n = max(1, math.ceil(req.eps ** (-1.0 / max(1.0, s))))
        coarse_nodes, coarse_xi = _march(d, n, alpha)
        for _ in range(max_doublings):
            fine_nodes, fine_xi = _march(d, 2 * n, alpha)
            diff = max(
                float(np.max(np.abs(fine_nodes[::2] - coarse_nodes))),
                float(np.max(np.abs(fine_xi - coarse_xi))) if alpha.size else 0.0,
            )
            n *= 2
            coarse_nodes, coarse_xi = fine_nodes, fine_xi
            if diff / (2.0**s - 1.0) <= ivp_error_target(d, req.eps):
                break
        xi, used = coarse_xi, n
    xi, repaired = _enforce_sorted(np.asarray(xi), req.eps, strict=True)
    return QuantileResult(
        alpha=list(req.alpha),
        xi_hat=xi.tolist(),
        method="ivp",
        setting=req.setting,
        eps=req.eps,
        total_queries=d.queries - q0,
        per_quantile_queries=[],
        steps=used,
        monotone_repaired=repaired,
    )


def quantile_error(d: Density, result: QuantileResult) -> float:
    """max_j |xi_hat_j - xi_j| against the reference CDF."""
    from .holder import reference_quantile

    return max(abs(x - reference_quantile(d, a)) for a, x in zip(result.alpha, result.xi_hat))


__all__ = [
    "QuantileRequest",
    "QuantileResult",
    "quantiles_bisect",
    "quantiles_ivp_det",
    "inverse_cdf_taylor",
    "reciprocal_series",
    "quantile_error",
    "absolute_bound",
]
