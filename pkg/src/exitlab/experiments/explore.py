"""Trend tables for questions left open; nothing here produces a verdict."""

from __future__ import annotations

import math

import numpy as np

from ..estimators import empirical_tail, fast_exit_ratio, survival_ratio
from ..geometry import Disk, SlitPlane
from ..sampler import StepConfig, batch
from .config import GridSpec
from .verify import Table, wedge_times


def local_slope(t, y) -> np.ndarray:
    """Centered differences of ``log y`` against ``log t`` (NaN where undefined)."""
    lt = np.log(np.asarray(t, float))
    with np.errstate(divide="ignore", invalid="ignore"):
        ly = np.log(np.asarray(y, float))
    out = np.full(lt.shape, np.nan)
    if lt.size >= 3:
        out[1:-1] = (ly[2:] - ly[:-2]) / (lt[2:] - lt[:-2])
    return out


def long_stay_trend(theta_u: float = math.pi / 4, theta_w: float = math.pi / 2,
                    n: int = 100_000, seed: int = 1, grid: GridSpec = GridSpec(1.0, 100.0, 40),
                    r: float = 1.0, h0: float = 5e-3, lam: float = 0.5,
                    workers: int = 1) -> Table:
    """``P(T^W > t) / P(T^U > t)`` for two wedges with its local log-log slope.

    A ratio tending to infinity shows up as a slope that stays positive.
    """
    g = grid.points()
    t_max = float(g[-1])
    cu = empirical_tail(wedge_times(theta_u, r, n, seed, h0, lam, t_max, workers), g)
    cw = empirical_tail(wedge_times(theta_w, r, n, seed, h0, lam, t_max, workers), g)
    rc = survival_ratio(cw, cu)
    slope = local_slope(rc.t, np.where(rc.reliable, rc.ratio, np.nan))
    rows = [(t, q, c, s, int(ok)) for t, q, c, s, ok in
            zip(rc.t, rc.ratio, rc.ci_half, slope, rc.reliable)]
    return Table(("t", "ratio", "ci_half", "log_slope", "reliable"), rows)


def alpha_sweep(alphas=(0.75, 0.8, 0.9, 0.95), n: int = 1_000_000, seed: int = 1,
                grid: GridSpec = GridSpec(0.06, 0.3, 20), h0: float = 1e-3, lam: float = 0.5,
                workers: int = 1) -> Table:
    """Fast-exit ratio of ``K_alpha`` against the disk for ``alpha`` past ``1/sqrt(2)``.

    One row per ``alpha`` at its smallest reliable time, together with the
    number of reliable points where the ratio fails to grow as ``t`` shrinks.
    """
    g = grid.points()
    cfg = StepConfig(h0=h0, lam=lam, t_max=float(g[-1]))
    cw = empirical_tail(batch(Disk(1.0), 0j, cfg, seed, n, workers).times(), g)
    rows = []
    for a in alphas:
        cu = empirical_tail(batch(SlitPlane(float(a)), 0j, cfg, seed, n, workers).times(), g)
        rc = fast_exit_ratio(cu, cw)
        rel = np.flatnonzero(rc.reliable)
        if rel.size == 0:
            rows.append((float(a), math.nan, math.nan, math.nan, 0, 0))
            continue
        i0 = rel[0]
        bad = int(np.count_nonzero(np.diff(rc.ratio[rel]) >= 0))
        rows.append((float(a), float(g[i0]), float(rc.ratio[i0]), float(rc.ci_half[i0]),
                     int(rel.size), bad))
    return Table(("alpha", "t", "ratio", "ci_half", "reliable_points", "violations"), rows)


def scaled_tail(theta: float = math.pi / 4, p_values=(1.05, 1.1, 1.25), n: int = 100_000,
                seed: int = 1, grid: GridSpec = GridSpec(1.0, 100.0, 40), r: float = 1.0,
                h0: float = 5e-3, lam: float = 0.5, workers: int = 1) -> Table:
    """``t^p P(T > t)`` on a wedge for exponents above its Hardy number.

    A positive lower bound shows up as a non-decreasing column.
    """
    g = grid.points()
    c = empirical_tail(wedge_times(theta, r, n, seed, h0, lam, float(g[-1]), workers), g)
    rows = []
    for p in p_values:
        for t, s, ci in zip(c.t_grid, c.survival, c.ci_half):
            rows.append((float(p), t, t ** p * s, t ** p * ci, int(round(s * c.n))))
    return Table(("p", "t", "scaled", "ci_half", "survivors"), rows)

