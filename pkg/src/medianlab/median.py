"""Perturbed bisection for the median (and any quantile level).

Each step approximates ``G(x_i) = F(x_i) - target`` with the integration
oracle of the chosen setting at precision ``eps`` and recurses on the sign of
the approximation, stopping once ``|G_i| <= eps`` or after
``ceil(log2(1/eps))`` steps.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .holder import Density
from .integrate import Setting, det_budget, integrate_det, integrate_mc
from .quantum import QuerySimState, integrate_quantum

LOG_BASE = 2


class Criterion(str, Enum):
    ABSOLUTE = "abs"
    RESIDUAL = "res"

    @classmethod
    def parse(cls, value: "str | Criterion") -> "Criterion":
        if isinstance(value, Criterion):
            return value
        aliases = {"absolute": "abs", "residual": "res"}
        try:
            return cls(aliases.get(value, value))
        except ValueError:
            raise DomainError(f"unknown criterion {value!r}") from None


def log_inv(eps: float) -> int:
    """ceil(log2(1/eps))."""
    return math.ceil(math.log(1.0 / eps, LOG_BASE) - 1e-12)


def i_max(eps: float) -> int:
    return max(1, log_inv(eps))


def delta_budget(setting: "Setting | str", eps: float) -> Optional[float]:
    """Per-step confidence budget of the integration oracle."""
    setting = Setting.parse(setting)
    if not 0.0 < eps < 0.5:
        raise DomainError(f"eps must lie in (0, 1/2), got {eps}")
    if setting is Setting.DETERMINISTIC:
        return None
    L = log_inv(eps)
    if setting is Setting.RANDOMIZED:
        return eps**2 / L
    return 1.0 / (4 * L)


@dataclass
class BisectionTrace:
    points: list = field(default_factory=list)  # (x_i, G_i)
    intervals: list = field(default_factory=list)  # [lo, hi] with midpoint x_i
    i0: int = 0
    stop_reason: str = ""
    total_queries: int = 0
    classical_queries: int = 0
    quantum_queries: int = 0


@dataclass
class MedianResult:
    xi_hat: float
    criterion: Criterion
    eps: float
    setting: Setting
    trace: BisectionTrace
    target: float = 0.5

    @property
    def queries(self) -> int:
        return self.trace.total_queries

    def to_dict(self) -> dict:
        out = {
            "xi_hat": self.xi_hat,
            "criterion": self.criterion.value,
            "eps": self.eps,
            "setting": self.setting.value,
            "target": self.target,
            "trace": asdict(self.trace),
        }
        out["trace"]["points"] = [list(p) for p in self.trace.points]
        out["trace"]["intervals"] = [list(iv) for iv in self.trace.intervals]
        if self.criterion is Criterion.ABSOLUTE:
            out["guarantee"] = self.absolute_guarantee()
        return out

    def interval_halfwidth(self) -> float:
        """Half-length of the last bisection interval."""
        if not self.trace.intervals:
            return 0.5
        lo, hi = self.trace.intervals[-1]
        return 0.5 * (hi - lo)

    def absolute_guarantee(self) -> dict:
        """Which branch of the absolute-error argument applies.

        Early stops certify a small residual (the error then follows from
        f >= gamma); a run that exhausts its iterations instead certifies that
        the last interval, of half-width <= eps, brackets the median.
        """
        if self.trace.stop_reason == "residual_small":
            return {"branch": "residual", "residual_bound": 2.0 * self.eps}
        return {"branch": "interval", "interval_halfwidth": self.interval_halfwidth()}


Oracle = Callable[[float, float, float], float]


def make_oracle(
    d: Density,
    setting: Setting,
    delta: Optional[float],
    rng: Optional[np.random.Generator],
    state: Optional[QuerySimState],
) -> Oracle:
    """Return ``(a, b, eps) -> approx integral`` for the setting."""
    if setting is Setting.DETERMINISTIC:
        return lambda a, b, eps: integrate_det(d, a, b, det_budget(eps, d.params, b - a))
    if setting is Setting.RANDOMIZED:
        return lambda a, b, eps: integrate_mc(d, a, b, eps, delta, rng)
    return lambda a, b, eps: integrate_quantum(d, a, b, eps, delta, state)


def perturbed_bisection(
    d: Density,
    target: float,
    eps: float,
    setting: "Setting | str",
    rng: Optional[np.random.Generator] = None,
    *,
    delta: Optional[float] = None,
    incremental: bool = False,
    criterion: "Criterion | str" = Criterion.RESIDUAL,
) -> MedianResult:
    """Approximate the solution of ``F(x) = target`` on [0, 1].

    ``delta`` overrides the default per-step budget (used for union bounds
    over several quantiles).  With ``incremental`` only the newly exposed
    piece ``[lo, x_i]`` is integrated, at precision ``eps / i_max`` per piece.
    """
    setting = Setting.parse(setting)
    criterion = Criterion.parse(criterion)
    if not 0.0 < eps < 0.5:
        raise DomainError(f"eps must lie in (0, 1/2), got {eps}")
    if delta is None:
        delta = delta_budget(setting, eps)
    if rng is None:
        rng = np.random.default_rng()
    state = QuerySimState(rng=rng)
    oracle = make_oracle(d, setting, delta, rng, state)

    n_max = i_max(eps)
    piece_eps = eps / n_max if incremental else eps
    q0 = d.queries
    trace = BisectionTrace()
    lo, hi = 0.0, 1.0
    mass_lo = 0.0  # approximate F(lo), incremental mode only
    x = 0.5
    for i in range(1, n_max + 1):
        x = 0.5 * (lo + hi)
        trace.intervals.append([lo, hi])
        if incremental:
            F_x = mass_lo + oracle(lo, x, piece_eps)
        else:
            F_x = oracle(0.0, x, eps)
        G = F_x - target
        trace.points.append((x, G))
        trace.i0 = i
        if abs(G) <= eps:
            trace.stop_reason = "residual_small"
            break
        if i == n_max:
            trace.stop_reason = "max_iters"
            break
        if G >= 0:
            hi = x
        else:
            lo, mass_lo = x, F_x

    trace.classical_queries = d.queries - q0
    trace.quantum_queries = state.queries_used
    trace.total_queries = trace.classical_queries + trace.quantum_queries
    return MedianResult(x, criterion, eps, setting, trace, target)


def median_bisection(
    d: Density,
    eps: float,
    setting: "Setting | str",
    rng: Optional[np.random.Generator] = None,
    *,
    criterion: "Criterion | str" = Criterion.RESIDUAL,
    incremental: bool = False,
) -> MedianResult:
    return perturbed_bisection(
        d, 0.5, eps, setting, rng, incremental=incremental, criterion=criterion
    )


def residual_bound(d: Density, eps: float) -> float:
    """Guaranteed residual error max{2, D} eps."""
    return max(2.0, d.params.D) * eps


def absolute_bound(d: Density, eps: float) -> float:
    """Guaranteed absolute error max{1, 2/gamma} eps (needs gamma > 0)."""
    if d.params.gamma <= 0:
        raise DomainError("absolute bound needs gamma > 0")
    return max(1.0, 2.0 / d.params.gamma) * eps
