"""Flat ``key = value`` sweep configuration.

Blank lines and ``#`` comments are ignored.  Recognised keys::

    settings     comma list of det, rand, quant          (default det)
    criteria     comma list of res, abs                  (default res)
    densities    comma list of catalog names             (default sine-0.5)
    r            smoothness order for the smooth families (default: catalog)
    eps_exp      exponents k of eps = 2^-k: "6,8,10" or "6:16"
    eps_exp_max_rand, eps_exp_max_quant
                 largest k run in that setting (default: no cap)
    trials       trials per cell for every setting
    trials_det, trials_rand, trials_quant
                 per-setting trial counts (defaults 1, 200, 200)
    seed         base seed; trial t of every cell uses seed + t
    workers      process pool size (default 1)
    incremental  integrate only the newly exposed piece (default false)
    timing       record wall-clock time per trial (default false)

Unknown keys raise :class:`ConfigError`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import CatalogError, ConfigError, DomainError
from ..holder import builtin_catalog
from ..integrate import Setting
from ..median import Criterion

SEED_ENV = "LAB_SEED"
DEFAULT_TRIALS = {Setting.DETERMINISTIC: 1, Setting.RANDOMIZED: 200, Setting.QUANTUM: 200}

KNOWN_KEYS = {
    "settings",
    "criteria",
    "densities",
    "r",
    "eps_exp",
    "eps_exp_max_rand",
    "eps_exp_max_quant",
    "trials",
    "trials_det",
    "trials_rand",
    "trials_quant",
    "seed",
    "workers",
    "incremental",
    "timing",
}


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


@dataclass
class SweepConfig:
    settings: list = field(default_factory=lambda: [Setting.DETERMINISTIC])
    criteria: list = field(default_factory=lambda: [Criterion.RESIDUAL])
    densities: list = field(default_factory=lambda: ["sine-0.5"])
    r: Optional[int] = None
    eps_exp: list = field(default_factory=lambda: [6, 8, 10])
    eps_exp_max: dict = field(default_factory=dict)
    trials: dict = field(default_factory=lambda: dict(DEFAULT_TRIALS))
    seed: int = field(default_factory=default_seed)
    workers: int = 1
    incremental: bool = False
    timing: bool = False

    def exponents_for(self, setting: Setting) -> list:
        cap = self.eps_exp_max.get(setting)
        return [k for k in self.eps_exp if cap is None or k <= cap]

    def validate(self) -> "SweepConfig":
        if not self.settings or not self.criteria or not self.densities or not self.eps_exp:
            raise ConfigError("settings, criteria, densities and eps_exp must be non-empty")
        if any(k < 2 for k in self.eps_exp):
            raise ConfigError("eps_exp: every exponent must be >= 2 (eps < 1/2)")
        if any(t < 1 for t in self.trials.values()):
            raise ConfigError("trials must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        for name in self.densities:
            try:
                builtin_catalog(name, r=self.r if not name.startswith("cusp") else None)
            except (CatalogError, DomainError) as exc:
                raise ConfigError(f"densities: {exc}") from None
        return self


def _split(value: str) -> list:
    return [v.strip() for v in value.split(",") if v.strip()]


def _int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _bool(key: str, value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def _exponents(value: str) -> list:
    if ":" in value:
        lo, hi = (_int("eps_exp", v.strip()) for v in value.split(":", 1))
        if hi < lo:
            raise ConfigError("eps_exp: empty range")
        return list(range(lo, hi + 1))
    return sorted({_int("eps_exp", v) for v in _split(value)})


def parse_config(text: str) -> SweepConfig:
    cfg = SweepConfig()
    seen = set()
    per_setting_trials = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown config key {key!r} (line {lineno})")
        if key in seen:
            raise ConfigError(f"duplicate config key {key!r} (line {lineno})")
        seen.add(key)
        try:
            if key == "settings":
                cfg.settings = [Setting.parse(v) for v in _split(value)]
            elif key == "criteria":
                cfg.criteria = [Criterion.parse(v) for v in _split(value)]
            elif key == "densities":
                cfg.densities = _split(value)
            elif key == "r":
                cfg.r = _int(key, value)
            elif key == "eps_exp":
                cfg.eps_exp = _exponents(value)
            elif key.startswith("eps_exp_max_"):
                cfg.eps_exp_max[Setting.parse(key.rsplit("_", 1)[1])] = _int(key, value)
            elif key == "trials":
                n = _int(key, value)
                cfg.trials = {s: n for s in Setting}
            elif key.startswith("trials_"):
                per_setting_trials[Setting.parse(key.split("_", 1)[1])] = _int(key, value)
            elif key == "seed":
                cfg.seed = _int(key, value)
            elif key == "workers":
                cfg.workers = _int(key, value)
            else:
                setattr(cfg, key, _bool(key, value))
        except DomainError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    cfg.trials.update(per_setting_trials)
    return cfg.validate()


def load_config(path: "str | Path") -> SweepConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
