"""Cost-exponent fitting with the logarithmic corrections divided out."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from ..errors import FitError
from ..integrate import Setting
from ..median import Criterion

MIN_POINTS = 5
MIN_SPAN_LOG2 = 8.0


class LogCorrection(str, Enum):
    NONE = "none"
    LOG = "log"
    LOG_LOGLOG = "log·loglog"
    LOG2 = "log²"
    LOG2_LOGLOG = "log²·loglog"

    def factor(self, eps: np.ndarray) -> np.ndarray:
        L = np.log2(1.0 / np.asarray(eps, dtype=float))
        LL = np.log2(L)
        return {
            LogCorrection.NONE: np.ones_like(L),
            LogCorrection.LOG: L,
            LogCorrection.LOG_LOGLOG: L * LL,
            LogCorrection.LOG2: L**2,
            LogCorrection.LOG2_LOGLOG: L**2 * LL,
        }[self]


def log_correction(setting: "Setting | str", criterion: "Criterion | str" = Criterion.RESIDUAL) -> LogCorrection:
    """Logarithmic factor of the upper cost bound for each setting/criterion."""
    setting = Setting.parse(setting)
    criterion = Criterion.parse(criterion)
    if setting is Setting.DETERMINISTIC:
        return LogCorrection.LOG
    if setting is Setting.QUANTUM:
        return LogCorrection.LOG_LOGLOG
    return LogCorrection.LOG2 if criterion is Criterion.ABSOLUTE else LogCorrection.LOG2_LOGLOG


def theory_exponent(setting: "Setting | str", s: float) -> float:
    setting = Setting.parse(setting)
    offset = {Setting.DETERMINISTIC: 0.0, Setting.RANDOMIZED: 0.5, Setting.QUANTUM: 1.0}[setting]
    return 1.0 / (s + offset)


@dataclass(frozen=True)
class FitResult:
    exponent_hat: float
    log_correction: LogCorrection
    constant_hat: float
    r_squared: float
    setting: str = ""
    criterion: str = ""
    density: str = ""
    n_points: int = 0
    theory: Optional[float] = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["log_correction"] = self.log_correction.value
        return out


def fit_power_law(eps, queries, correction: LogCorrection) -> tuple:
    """Least squares of log2(queries / L(eps)) on log2(1/eps).

    Returns (slope, constant, r_squared).
    """
    eps = np.asarray(eps, dtype=float)
    q = np.asarray(queries, dtype=float)
    x = np.log2(1.0 / eps)
    y = np.log2(q / correction.factor(eps))
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(2.0**icpt), min(1.0, max(0.0, r2))


def fit_exponent(
    records: Iterable,
    setting: "Setting | str",
    criterion: "Criterion | str | None" = None,
    correction: Optional[LogCorrection] = None,
) -> FitResult:
    """Fit the cost exponent of one setting from sweep records.

    Queries are averaged per eps before fitting.  Needs at least five
    distinct eps values spanning a factor of 2^8 or more.
    """
    setting = Setting.parse(setting)
    recs = [r for r in records if Setting.parse(r.setting) is setting]
    if criterion is not None:
        criterion = Criterion.parse(criterion)
        recs = [r for r in recs if Criterion.parse(r.criterion) is criterion]
    if not recs:
        raise FitError(f"no records for setting {setting.value}")
    if criterion is None:
        criterion = Criterion.parse(recs[0].criterion)
    by_eps: dict = {}
    for r in recs:
        by_eps.setdefault(float(r.eps), []).append(float(r.queries))
    if len(by_eps) < MIN_POINTS:
        raise FitError(f"need >= {MIN_POINTS} distinct eps values, got {len(by_eps)}")
    eps = np.array(sorted(by_eps))
    span = math.log2(eps.max() / eps.min())
    if span < MIN_SPAN_LOG2 - 1e-9:
        raise FitError(f"eps range spans 2^{span:.2f}, need >= 2^{MIN_SPAN_LOG2:g}")
    q = np.array([np.mean(by_eps[e]) for e in eps])
    if np.any(q <= 0):
        raise FitError("query counts must be positive to fit a power law")
    corr = correction or log_correction(setting, criterion)
    slope, const, r2 = fit_power_law(eps, q, corr)
    s = float(recs[0].r) + float(recs[0].rho)
    dens = {r.density for r in recs}
    return FitResult(
        exponent_hat=slope,
        log_correction=corr,
        constant_hat=const,
        r_squared=r2,
        setting=setting.value,
        criterion=criterion.value,
        density=",".join(sorted(dens)),
        n_points=len(eps),
        theory=theory_exponent(setting, s),
    )


def fit_all(records: Iterable) -> list:
    """One fit per (setting, criterion, density) group with enough data."""
    groups: dict = {}
    for r in records:
        groups.setdefault((r.setting, r.criterion, r.density), []).append(r)
    fits = []
    for key in sorted(groups):
        try:
            fits.append(fit_exponent(groups[key], key[0], key[1]))
        except FitError:
            continue
    return fits
