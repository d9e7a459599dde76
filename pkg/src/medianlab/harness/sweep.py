"""Sweep orchestration: one record per (setting, criterion, density, eps, trial)."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from ..holder import Density, builtin_catalog, reference_median
from ..median import Criterion, absolute_bound, median_bisection, residual_bound
from .config import SweepConfig


@dataclass(frozen=True)
class SweepRecord:
    setting: str
    criterion: str
    density: str
    r: int
    rho: float
    D: float
    H: float
    gamma: float
    eps: float
    seed: int
    queries: int
    achieved_error_abs: float
    achieved_error_res: float
    success: bool
    wall_time: float

    @classmethod
    def field_names(cls) -> list:
        return [f.name for f in fields(cls)]

    def as_row(self) -> tuple:
        return astuple(self)

    def sort_key(self) -> tuple:
        return (self.setting, self.criterion, self.density, -self.eps, self.seed)


def density_for(name: str, r: Optional[int] = None) -> Density:
    """Fresh catalog density; ``r`` is ignored for families that fix their own."""
    if name.startswith("cusp"):
        r = None
    return builtin_catalog(name, r=r)


@lru_cache(maxsize=None)
def _reference(name: str, r: Optional[int]) -> float:
    return reference_median(density_for(name, r))


@dataclass(frozen=True)
class Task:
    setting: str
    criterion: str
    density: str
    r: Optional[int]
    eps: float
    seed: int
    incremental: bool
    timing: bool


def run_trial(task: Task) -> SweepRecord:
    d = density_for(task.density, task.r)
    rng = np.random.default_rng(task.seed)
    t0 = time.perf_counter()
    res = median_bisection(
        d, task.eps, task.setting, rng, criterion=task.criterion, incremental=task.incremental
    )
    elapsed = time.perf_counter() - t0 if task.timing else 0.0
    xi_ref = _reference(task.density, task.r)
    err_abs = abs(res.xi_hat - xi_ref)
    err_res = abs(float(d.cdf(res.xi_hat)) - 0.5)
    if Criterion.parse(task.criterion) is Criterion.ABSOLUTE and d.params.gamma > 0:
        success = err_abs <= absolute_bound(d, task.eps)
    else:
        success = err_res <= residual_bound(d, task.eps)
    p = d.params
    return SweepRecord(
        setting=task.setting,
        criterion=task.criterion,
        density=task.density,
        r=p.r,
        rho=p.rho,
        D=p.D,
        H=p.H,
        gamma=p.gamma,
        eps=task.eps,
        seed=task.seed,
        queries=int(res.queries),
        achieved_error_abs=err_abs,
        achieved_error_res=err_res,
        success=bool(success),
        wall_time=elapsed,
    )


def plan_tasks(cfg: SweepConfig) -> list:
    tasks = []
    for setting in cfg.settings:
        for criterion in cfg.criteria:
            for name in cfg.densities:
                for k in cfg.exponents_for(setting):
                    for t in range(cfg.trials[setting]):
                        tasks.append(
                            Task(
                                setting=setting.value,
                                criterion=criterion.value,
                                density=name,
                                r=cfg.r,
                                eps=2.0**-k,
                                seed=cfg.seed + t,
                                incremental=cfg.incremental,
                                timing=cfg.timing,
                            )
                        )
    return tasks


def run_sweep(cfg: SweepConfig) -> list:
    """Execute every cell; records come back sorted independently of scheduling."""
    tasks = plan_tasks(cfg)
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(run_trial, tasks, chunksize=max(1, len(tasks) // (8 * cfg.workers))))
    else:
        records = [run_trial(t) for t in tasks]
    return sorted(records, key=SweepRecord.sort_key)


def group_records(records: Iterable[SweepRecord]) -> dict:
    """{(setting, criterion, density): [records]}."""
    out: dict = {}
    for rec in records:
        out.setdefault((rec.setting, rec.criterion, rec.density), []).append(rec)
    return out


def success_rate(records: Iterable[SweepRecord]) -> float:
    recs = list(records)
    return sum(r.success for r in recs) / len(recs) if recs else float("nan")


def l2_residual(records: Iterable[SweepRecord]) -> float:
    errs = np.array([r.achieved_error_res for r in records])
    return float(np.sqrt(np.mean(errs**2))) if errs.size else float("nan")


def mean_cost_by_eps(records: Iterable[SweepRecord]) -> dict:
    by: dict = {}
    for r in records:
        by.setdefault(r.eps, []).append(r.queries)
    return {e: float(np.mean(q)) for e, q in sorted(by.items(), reverse=True)}
