"""``lab`` command line: sweep, median, quantiles, adversary, fit.

Exit codes: 0 success, 2 bad configuration or arguments, 3 internal
invariant violation.  ``LAB_SEED`` sets the default seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .adversary import (
    adversary_params,
    build_family,
    check_median_identity,
    make_adversarial_density,
)
from .errors import CatalogError, ConfigError, DomainError, FitError, InvariantError
from .harness.config import default_seed, load_config
from .harness.emit import emit, read_csv, write_fits
from .harness.fit import fit_all
from .harness.sweep import density_for, run_sweep
from .holder import reference_median, reference_quantile, verify_membership
from .median import Criterion, median_bisection, residual_bound
from .quantiles import QuantileRequest, quantile_error, quantiles_bisect, quantiles_ivp_det

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _dump(doc, out: Optional[str] = None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    print(text)


def _alpha_list(text: str) -> list:
    try:
        return [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha list {text!r}") from None


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    records = run_sweep(cfg)
    fits = fit_all(records)
    for path in emit(records, fits, args.out):
        print(path)
    return EXIT_OK


def cmd_median(args) -> int:
    d = density_for(args.density, args.r)
    res = median_bisection(
        d,
        args.eps,
        args.setting,
        np.random.default_rng(args.seed),
        criterion=args.criterion,
        incremental=args.incremental,
    )
    doc = res.to_dict()
    doc["density"] = d.name
    doc["params"] = d.params.as_dict()
    doc["seed"] = args.seed
    xi = reference_median(d)
    doc["reference"] = {
        "xi": xi,
        "error_abs": abs(res.xi_hat - xi),
        "error_res": abs(float(d.cdf(res.xi_hat)) - 0.5),
        "residual_bound": residual_bound(d, args.eps),
    }
    if args.trace:
        Path(args.trace).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    summary = {k: v for k, v in doc.items() if k != "trace"}
    summary["queries"] = res.queries
    _dump(summary)
    return EXIT_OK


def cmd_quantiles(args) -> int:
    d = density_for(args.density, args.r)
    req = QuantileRequest(args.alpha, args.eps, args.setting)
    if args.method == "ivp":
        res = quantiles_ivp_det(d, req)
    else:
        res = quantiles_bisect(d, req, np.random.default_rng(args.seed))
    doc = res.to_dict()
    doc["density"] = d.name
    doc["reference"] = [reference_quantile(d, a) for a in res.alpha]
    doc["max_error_abs"] = quantile_error(d, res)
    _dump(doc)
    return EXIT_OK


def cmd_adversary(args) -> int:
    params = adversary_params(args.r, args.rho, D=args.D, H=args.H)
    fam = build_family(args.eps1, params)
    rng = np.random.default_rng(args.seed)
    residuals, members = [], []
    draws = [np.ones(fam.n)] + [rng.random(fam.n) for _ in range(args.draws)]
    for x in draws:
        d = make_adversarial_density(fam, x)
        residuals.append(check_median_identity(fam, x, reference_median(d)))
        members.append(verify_membership(d).ok)
    doc = {
        "family": fam.to_dict(),
        "seed": args.seed,
        "identity_residuals": {"all_ones": residuals[0], "random": residuals[1:]},
        "max_identity_residual": max(residuals),
        "membership_ok": all(members),
    }
    _dump(doc)
    return EXIT_OK


def cmd_fit(args) -> int:
    try:
        records = read_csv(args.inp)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    fits = fit_all(records)
    if not fits:
        raise FitError("no group has enough eps values to fit")
    if args.out:
        write_fits(fits, args.out)
    _dump([f.to_dict() for f in fits])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="run a configured sweep and write CSV, fits and plots")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int, default=None)
    sp.set_defaults(func=cmd_sweep)

    def common(q):
        q.add_argument("--density", default="sine-0.5")
        q.add_argument("--r", type=int, default=None, help="smoothness order for smooth families")
        q.add_argument("--setting", choices=["det", "rand", "quant"], default="det")
        q.add_argument("--eps", type=float, default=2.0**-10)
        q.add_argument("--seed", type=int, default=None)

    sp = sub.add_parser("median", help="approximate one median")
    common(sp)
    sp.add_argument("--criterion", choices=[c.value for c in Criterion], default="res")
    sp.add_argument("--incremental", action="store_true")
    sp.add_argument("--trace", default=None, metavar="OUT.json")
    sp.set_defaults(func=cmd_median)

    sp = sub.add_parser("quantiles", help="approximate a quantile vector")
    common(sp)
    sp.add_argument("--alpha", type=_alpha_list, default=[0.1, 0.5, 0.9])
    sp.add_argument("--method", choices=["bisect", "ivp"], default="bisect")
    sp.set_defaults(func=cmd_quantiles)

    sp = sub.add_parser("adversary", help="build a hard bump family and check the median identity")
    sp.add_argument("--eps1", type=float, default=2.0**-6)
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--rho", type=float, default=1.0)
    sp.add_argument("--D", type=float, default=adversary_params().D)
    sp.add_argument("--H", type=float, default=adversary_params().H)
    sp.add_argument("--draws", type=int, default=10, help="random coefficient vectors to check")
    sp.add_argument("--seed", type=int, default=None)
    sp.set_defaults(func=cmd_adversary)

    sp = sub.add_parser("fit", help="fit cost exponents from a sweep CSV")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_fit)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = default_seed()
        return args.func(args)
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ConfigError, DomainError, CatalogError, FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
