"""Static SVG plots of tail and ratio tables.

Output is byte-stable for a fixed input: the SVG id salt is fixed and no
creation date is written.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..errors import SchemaMismatch  # noqa: E402
from ..estimators import RATIO_COLUMNS, TAIL_COLUMNS, read_ratio, read_tail  # noqa: E402

SCHEMAS = {"tail": TAIL_COLUMNS, "ratio": RATIO_COLUMNS}


def detect_kind(path) -> str:
    with open(path, newline="") as fh:
        header = next(csv.reader(fh), None)
    for kind, cols in SCHEMAS.items():
        if header is not None and tuple(header) == cols:
            return kind
    raise SchemaMismatch(f"{path}: not a tail or ratio table")


def _tail_figure(path):
    c = read_tail(path)
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    m = c.survival > 0
    lo = np.clip(c.survival - c.ci_half, 1e-300, None)
    hi = c.survival + c.ci_half
    ax.fill_between(c.t_grid[m], lo[m], hi[m], color="C0", alpha=0.25, lw=0)
    ax.plot(c.t_grid[m], c.survival[m], "o-", color="C0", ms=3, lw=1)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("P(T > t)")
    ax.set_title(f"{Path(path).stem}  (n = {c.n})")
    return fig


def _ratio_figure(path):
    rc = read_ratio(path)
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ok = rc.reliable & np.isfinite(rc.ratio) & (rc.ratio > 0)
    bad = ~rc.reliable & np.isfinite(rc.ratio) & (rc.ratio > 0)
    ax.errorbar(rc.t[ok], rc.ratio[ok], yerr=rc.ci_half[ok], fmt="o", color="C1", ms=4,
                capsize=2, label="reliable")
    ax.plot(rc.t[bad], rc.ratio[bad], "o", mfc="none", mec="C1", ms=4, label="unreliable")
    ax.axhline(1.0, color="0.5", lw=0.8, ls="--")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("ratio")
    ax.set_title(Path(path).stem)
    ax.legend(frameon=False, fontsize=8)
    return fig


def emit_plot(csv_path, kind: str | None = None, out=None) -> Path:
    """Render a tail or ratio CSV to SVG next to it (or at ``out``)."""
    csv_path = Path(csv_path)
    found = detect_kind(csv_path)
    if kind is not None and kind != found:
        raise SchemaMismatch(f"{csv_path}: asked for a {kind} plot of a {found} table")
    out = Path(out) if out is not None else csv_path.with_suffix(".svg")
    out.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context({"svg.hashsalt": "exitlab", "svg.fonttype": "path"}):
        fig = _tail_figure(csv_path) if found == "tail" else _ratio_figure(csv_path)
        fig.tight_layout()
        fig.savefig(out, format="svg", metadata={"Date": None})
        plt.close(fig)
    return out
