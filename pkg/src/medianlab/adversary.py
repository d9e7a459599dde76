"""Hard instances for median approximation.

Densities ``f = 1 + sum x_i h_i - sum x_i g_i`` with ``n`` equal polynomial
bumps ``h_i`` packed in [0, 1/4] and mirrored bumps ``g_i`` in [3/4, 1].
Every bump carries mass ``eps1^(1 + 1/s)`` (s = r + rho), so the median
encodes the mean of ``x``:

    sum x_i = (1/2 - median) / eps1^(1 + 1/s).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError
from .holder import Density, HolderParams, reference_median
from .integrate import Setting
from .median import median_bisection


#: Class constants used when none are given: roomy enough that families at
#: eps1 = 2^-4 already hold at least one bump for r + rho <= 2.
ADVERSARY_D = 4.0
ADVERSARY_H = 1000.0
ADVERSARY_GAMMA = 2.0 / 3.0


def adversary_params(r: int = 1, rho: float = 1.0, D: float = ADVERSARY_D, H: float = ADVERSARY_H) -> HolderParams:
    return HolderParams(r=r, rho=rho, D=D, H=H, gamma=ADVERSARY_GAMMA)


def bump_profile(r: int) -> Polynomial:
    """4^(r+1) (u (1 - u))^(r+1): peak 1 at u = 1/2, r derivatives vanishing
    at both ends and a Lipschitz r-th derivative."""
    return Polynomial([0.0, 4.0, -4.0]) ** (r + 1)


def _max_abs(p: Polynomial) -> float:
    crit = [0.0, 1.0] + [z.real for z in p.deriv().roots() if abs(z.imag) < 1e-12 and 0 <= z.real <= 1]
    return float(max(abs(p(c)) for c in crit))


@dataclass(frozen=True)
class ProfileConstants:
    integral: float  # int_0^1 psi
    max_derivs: tuple  # max |psi^(j)|, j = 0..r+1
    holder: float  # Hölder-rho constant of the zero-extended psi^(r)


def profile_constants(r: int, rho: float) -> ProfileConstants:
    psi = bump_profile(r)
    m = tuple(_max_abs(psi.deriv(j)) if j else _max_abs(psi) for j in range(r + 2))
    lip = m[r + 1]
    hol = lip**rho * (2.0 * m[r]) ** (1.0 - rho)
    integ = float(psi.integ()(1.0) - psi.integ()(0.0))
    return ProfileConstants(integ, m, hol)


@dataclass(frozen=True)
class BumpFamily:
    eps1: float
    params: HolderParams
    n: int
    width: float
    amp: float
    c: float  # amp = c * eps1
    c_n: float  # n = floor(c_n * eps1^(-1/s))
    kappa: float  # width = kappa * eps1^(1/s)
    supports_h: tuple = field(repr=False)
    supports_g: tuple = field(repr=False)

    @property
    def smoothness(self) -> float:
        return self.params.smoothness

    @property
    def bump_mass(self) -> float:
        return self.eps1 ** (1.0 + 1.0 / self.smoothness)

    def holder_quotient(self) -> float:
        """Hölder constant of f^(r) implied by the construction (x in [0,1]^n)."""
        pc = profile_constants(self.params.r, self.params.rho)
        return 2.0 ** (1 - self.params.rho) * pc.holder * self.amp / self.width**self.smoothness

    def to_dict(self) -> dict:
        out = asdict(self)
        out["params"] = self.params.as_dict()
        out["supports_h"] = [list(s) for s in self.supports_h]
        out["supports_g"] = [list(s) for s in self.supports_g]
        out["holder_quotient"] = self.holder_quotient()
        out["bump_mass"] = self.bump_mass
        return out


def build_family(eps1: float, params: HolderParams) -> BumpFamily:
    """Widest-packing bump family admissible for ``params``.

    The width factor kappa is the smallest value >= 1/4 keeping the Hölder
    quotient <= H, every |f^(j)| <= D and the bump height <= 1/3.
    """
    if not 0 < eps1 < 1:
        raise DomainError("eps1 must lie in (0, 1)")
    r, rho = params.r, params.rho
    s = params.smoothness
    pc = profile_constants(r, rho)
    I = pc.integral
    kappa = 0.25
    kappa = max(kappa, (2.0 ** (1 - rho) * pc.holder / (I * params.H)) ** (1.0 / (s + 1)))
    kappa = max(kappa, 3.0 * eps1 / I)
    if params.D < 4.0 / 3.0:
        if params.D <= 1.0:
            raise DomainError("D must exceed 1 to fit bumps on top of the uniform density")
        kappa = max(kappa, eps1 / (I * (params.D - 1.0)))
    for j in range(1, r + 1):
        need = eps1 ** (1.0 - j / s) * pc.max_derivs[j] / (I * params.D)
        kappa = max(kappa, need ** (1.0 / (j + 1)))
    width = kappa * eps1 ** (1.0 / s)
    n = int(math.floor(0.25 / width * (1 + 1e-12)))
    if n < 1:
        raise DomainError(f"eps1={eps1} too large: no admissible bump fits in [0, 1/4]")
    amp = eps1 / (kappa * I)
    sup_h = tuple((i * width, (i + 1) * width) for i in range(n))
    sup_g = tuple((0.75 + i * width, 0.75 + (i + 1) * width) for i in range(n))
    return BumpFamily(
        eps1=eps1,
        params=params,
        n=n,
        width=width,
        amp=amp,
        c=amp / eps1,
        c_n=1.0 / (4.0 * kappa),
        kappa=kappa,
        supports_h=sup_h,
        supports_g=sup_g,
    )


def make_adversarial_density(
    fam: BumpFamily, x: Sequence[float], params: Optional[HolderParams] = None
) -> Density:
    x = np.asarray(x, dtype=float).ravel()
    if x.size != fam.n:
        raise DomainError(f"need {fam.n} coefficients, got {x.size}")
    if np.any(x < 0) or np.any(x > 1):
        raise DomainError("coefficients must lie in [0, 1]")
    params = fam.params if params is None else params
    r = params.r
    psi = bump_profile(fam.params.r)
    dpsi = [psi.deriv(j) if j else psi for j in range(r + 1)]
    Psi = psi.integ()
    w, amp, n = fam.width, fam.amp, fam.n
    cum = np.concatenate([[0.0], np.cumsum(x)])
    unit_mass = amp * w * float(Psi(1.0))

    def locate(t):
        k = np.floor(t / w).astype(int)
        inside = (t >= 0) & (k < n)
        k = np.clip(k, 0, n - 1)
        u = np.clip(t / w - k, 0.0, 1.0)
        return k, u, inside

    def derivs(t, j):
        out = np.ones_like(t) if j == 0 else np.zeros_like(t)
        for shift, sign in ((0.0, 1.0), (0.75, -1.0)):
            k, u, inside = locate(t - shift)
            val = amp * w**-j * dpsi[j](u) * x[k]
            out = out + sign * np.where(inside, val, 0.0)
        return out

    def cdf(t):
        t = np.asarray(t, dtype=float)
        out = t.copy()
        for shift, sign in ((0.0, 1.0), (0.75, -1.0)):
            s = t - shift
            k = np.floor(s / w).astype(int)
            full = np.clip(k, 0, n)
            part = np.where((s >= 0) & (k < n), x[np.clip(k, 0, n - 1)] * amp * w * Psi(np.clip(s / w - k, 0, 1)), 0.0)
            part = np.where(s >= 0, part, 0.0)
            out = out + sign * (cum[full] * unit_mass + part)
        return out

    return Density(params, derivs, cdf, f"adversary-{fam.eps1:g}")


def check_median_identity(fam: BumpFamily, x: Sequence[float], xi_ref: float) -> float:
    """|sum x_i - (1/2 - xi) / eps1^(1+1/s)|."""
    return abs(float(np.sum(x)) - (0.5 - xi_ref) / fam.bump_mass)


def adversary_eps1(setting: "Setting | str", eps: float, s: float) -> float:
    """Bump scale for a target precision in each setting."""
    setting = Setting.parse(setting)
    if setting is Setting.DETERMINISTIC:
        return 4.0 * eps
    if setting is Setting.RANDOMIZED:
        return eps ** (s / (s + 0.5))
    return eps ** (s / (s + 1.0))


@dataclass
class ProbeReport:
    setting: str
    eps: float
    eps1: float
    n: int
    family: dict
    costs: list
    mean_errors: list
    residual_errors: list

    @property
    def mean_cost(self) -> float:
        return float(np.mean(self.costs))

    def floor_constant(self, exponent: float) -> float:
        """Smallest c with cost >= c * eps^(-exponent) over the trials."""
        return float(min(self.costs)) * self.eps**exponent

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mean_cost"] = self.mean_cost
        return d


def hardness_probe(
    setting: "Setting | str",
    eps: float,
    trials: int,
    rng: np.random.Generator,
    params: Optional[HolderParams] = None,
    x: Optional[Sequence[float]] = None,
) -> ProbeReport:
    """Run the median solver on random hard instances.

    Measured costs can only refute an implementation that is too cheap; they
    certify nothing about lower bounds.
    """
    setting = Setting.parse(setting)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    params = params or adversary_params()
    eps1 = adversary_eps1(setting, eps, params.smoothness)
    fam = build_family(eps1, params)
    costs, mean_errs, res_errs = [], [], []
    for _ in range(trials):
        xs = np.asarray(x, dtype=float) if x is not None else rng.integers(0, 2, fam.n).astype(float)
        d = make_adversarial_density(fam, xs)
        res = median_bisection(d, eps, setting, rng)
        costs.append(int(res.queries))
        est_mean = (0.5 - res.xi_hat) / (fam.n * fam.bump_mass)
        mean_errs.append(abs(float(np.mean(xs)) - est_mean))
        res_errs.append(abs(float(d.cdf(res.xi_hat)) - 0.5))
    return ProbeReport(
        setting=setting.value,
        eps=eps,
        eps1=eps1,
        n=fam.n,
        family=fam.to_dict(),
        costs=costs,
        mean_errors=mean_errs,
        residual_errors=res_errs,
    )


def reference_identity_residual(fam: BumpFamily, x: Sequence[float]) -> float:
    d = make_adversarial_density(fam, x)
    return check_median_identity(fam, x, reference_median(d))
