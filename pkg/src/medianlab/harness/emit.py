"""Flat-file outputs: sweep.csv, fits.json and one SVG plot per setting."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ..integrate import Setting
from .fit import FitResult, theory_exponent
from .sweep import SweepRecord, mean_cost_by_eps

CSV_NAME = "sweep.csv"
FITS_NAME = "fits.json"


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest round-trip form, locale independent
    return str(value)


def records_to_csv(records: Iterable[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SweepRecord.field_names())
    for rec in records:
        w.writerow([_cell(v) for v in rec.as_row()])
    return buf.getvalue()


def _parse_bool(v: str) -> bool:
    if v not in ("true", "false"):
        raise ValueError(f"bad boolean {v!r}")
    return v == "true"


_CONVERT = {
    "r": int,
    "seed": int,
    "queries": int,
    "success": _parse_bool,
    "setting": str,
    "criterion": str,
    "density": str,
}


def read_csv(path: "str | Path") -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SweepRecord.field_names():
            raise ValueError(f"{path}: header does not match the sweep record layout")
        return [
            SweepRecord(**{k: _CONVERT.get(k, float)(v) for k, v in row.items()}) for row in reader
        ]


def write_csv(records: Iterable[SweepRecord], path: "str | Path") -> Path:
    path = Path(path)
    path.write_text(records_to_csv(records), encoding="utf-8")
    return path


def write_fits(fits: Sequence[FitResult], path: "str | Path") -> Path:
    path = Path(path)
    doc = [f.to_dict() for f in fits]
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def plot_setting(records: Sequence[SweepRecord], setting: Setting, path: "str | Path") -> Path:
    """Log-log cost versus 1/eps with the three theory slopes for reference."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "medianlab"
    fig, ax = plt.subplots(figsize=(6, 4.5))
    groups: dict = {}
    for r in records:
        if r.setting == setting.value:
            groups.setdefault((r.criterion, r.density), []).append(r)
    anchor = None
    s = None
    for (crit, dens), recs in sorted(groups.items()):
        costs = mean_cost_by_eps(recs)
        x = 1.0 / np.array(list(costs))
        y = np.array(list(costs.values()))
        ax.loglog(x, y, "o-", label=f"{dens} ({crit})")
        if anchor is None:
            anchor = (x[0], y[0])
            s = recs[0].r + recs[0].rho
    if anchor is not None:
        x0, y0 = anchor
        xs = np.array([x0, x0 * 2.0**10])
        for st, style in zip(Setting, ("--", "-.", ":")):
            k = theory_exponent(st, s)
            ax.loglog(xs, y0 * (xs / x0) ** k, style, color="gray", label=f"slope {k:.3f} ({st.value})")
    ax.set_xlabel("1/eps")
    ax.set_ylabel("mean queries")
    ax.set_title(f"median cost, setting {setting.value}")
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def emit(records: Sequence[SweepRecord], fits: Sequence[FitResult], out_dir: "str | Path") -> list:
    """Write sweep.csv, fits.json and plot_<setting>.svg into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [write_csv(records, out / CSV_NAME), write_fits(fits, out / FITS_NAME)]
    for setting in Setting:
        if any(r.setting == setting.value for r in records):
            written.append(plot_setting(records, setting, out / f"plot_{setting.value}.svg"))
    return written
