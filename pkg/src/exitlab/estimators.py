"""From exit-time samples to tails, moments, exponent fits and ratio curves.

Samples are plain arrays of exit times.  ``inf`` marks a path still inside at
the simulation horizon; it counts as exceeding every grid time, so tails are
valid up to the horizon.  Moments need finite samples.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
import math
from pathlib import Path

import numpy as np

from .errors import (DegenerateDenominator, EmptySample, GridMismatch, InsufficientCoverage,
                     InvalidParameter, SchemaMismatch, UnsortedGrid, ZeroSurvival)

Z95 = 1.959963984540054
RELIABLE_COUNT = 30

TAIL_COLUMNS = ("t", "survival", "ci_half", "n")
RATIO_COLUMNS = ("t", "ratio", "ci_half", "reliable")


def geometric_grid(lo: float, hi: float, n: int = 40) -> np.ndarray:
    if not 0 < lo < hi:
        raise InvalidParameter("need 0 < lo < hi")
    if n < 2:
        raise InvalidParameter("a grid needs at least two points")
    return np.geomspace(lo, hi, n)


FAST_EXIT_GRID = (0.05, 0.5)
LONG_STAY_GRID = (1.0, 100.0)


def wilson_half_width(k, n, z: float = Z95):
    """Half-width of the Wilson score interval for ``k`` successes out of ``n``."""
    k = np.asarray(k, dtype=float)
    p = k / n
    z2 = z * z
    return z * np.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n)


def _fmt(v: float) -> str:
    return repr(float(v))


def _read_rows(path, columns):
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != columns:
        raise SchemaMismatch(f"{path}: expected header {','.join(columns)}")
    if len(rows) < 2:
        raise SchemaMismatch(f"{path}: no data rows")
    return rows[1:]


# ------------------------------------------------------------------ tails


@dataclass(frozen=True)
class TailCurve:
    """Survival ``P(T > t)`` on a grid; ``ci_half`` is the 95% Wilson half-width."""

    t_grid: np.ndarray
    survival: np.ndarray
    ci_half: np.ndarray
    n: int

    def __post_init__(self):
        if not (len(self.t_grid) == len(self.survival) == len(self.ci_half)):
            raise InvalidParameter("tail curve columns differ in length")

    @property
    def exceed(self) -> np.ndarray:
        """Number of samples beyond each grid time."""
        return np.rint(self.survival * self.n).astype(np.int64)

    @property
    def exited(self) -> np.ndarray:
        return self.n - self.exceed

    @property
    def cdf(self) -> np.ndarray:
        return 1.0 - self.survival

    @property
    def se(self) -> np.ndarray:
        """Plain binomial standard error of each survival value."""
        s = self.survival
        return np.sqrt(s * (1 - s) / self.n)

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TAIL_COLUMNS)
            for t, s, c in zip(self.t_grid, self.survival, self.ci_half):
                w.writerow((_fmt(t), _fmt(s), _fmt(c), self.n))
        return path


def read_tail(path) -> TailCurve:
    rows = _read_rows(path, TAIL_COLUMNS)
    a = np.array([[float(x) for x in r[:3]] for r in rows])
    return TailCurve(a[:, 0], a[:, 1], a[:, 2], int(rows[0][3]))


def _as_samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float).ravel()
    x = x[~np.isnan(x)]
    if x.size == 0:
        raise EmptySample("no usable samples")
    return x


def _check_grid(t_grid) -> np.ndarray:
    g = np.asarray(t_grid, dtype=float).ravel()
    if g.size == 0:
        raise UnsortedGrid("empty grid")
    if np.any(np.diff(g) <= 0):
        raise UnsortedGrid("grid must be strictly ascending")
    return g


def empirical_tail(samples, t_grid) -> TailCurve:
    """Fraction of samples strictly greater than each grid time.

    NaN entries (failed paths) are ignored.
    """
    x = np.sort(_as_samples(samples))
    g = _check_grid(t_grid)
    n = x.size
    k = n - np.searchsorted(x, g, side="right")
    return TailCurve(g, k / n, wilson_half_width(k, n), n)


# ------------------------------------------------------------------ moments


@dataclass(frozen=True)
class MomentEstimate:
    p: float
    value: float
    stderr: float
    divergence_flag: bool
    top_decile_share: float = math.nan


def _jackknife_mean_se(v: np.ndarray, groups: int = 50) -> float:
    n = v.size
    g = min(groups, n)
    if g < 2:
        return math.nan
    edges = np.linspace(0, n, g, endpoint=False).astype(int)
    sums = np.add.reduceat(v, edges)
    sizes = np.diff(np.append(edges, n))
    total = v.sum()
    loo = (total - sums) / (n - sizes)
    return float(math.sqrt((g - 1) / g * np.sum((loo - loo.mean()) ** 2)))


def moment(samples, p: float, hardy: float | None = None) -> MomentEstimate:
    """Sample mean of ``T^p`` with a delete-a-group jackknife standard error.

    The divergence flag is raised when the largest tenth of the samples carries
    more than half of the estimate, or when ``p >= hardy`` for a known Hardy
    number.
    """
    if not p > 0:
        raise InvalidParameter("p must be positive")
    x = _as_samples(samples)
    if not np.all(np.isfinite(x)):
        raise InvalidParameter("moments need finite samples; cap censored values first")
    if np.any(x < 0):
        raise InvalidParameter("exit times are non-negative")
    v = x ** p
    total = float(v.sum())
    k = max(1, x.size // 10)
    top = float(np.sort(v)[-k:].sum())
    share = top / total if total > 0 else 0.0
    flag = share > 0.5 or (hardy is not None and p >= hardy)
    return MomentEstimate(p, total / x.size, _jackknife_mean_se(v), bool(flag), share)


# ------------------------------------------------------------------ slope fits


@dataclass(frozen=True)
class SlopeFit:
    """Power-law fit ``P(T > t) ~ C t^{-p_hat}`` over a window."""

    p_hat: float
    ci_half: float
    window: tuple
    r_squared: float
    n_points: int = 0
    stderr: float = math.nan

    def covers(self, target: float) -> bool:
        return abs(self.p_hat - target) <= self.ci_half


def hardy_fit(curve: TailCurve, window) -> SlopeFit:
    """Weighted least-squares slope of ``log survival`` against ``log t``.

    Weights are inverse delta-method variances ``n S / (1 - S)`` of the log
    survival, so sparse far-tail points count less.  Survival estimates on one
    grid come from the same sample and are strongly correlated, which the
    regression residuals do not see; the standard error is therefore the
    larger of the regression one and the one implied by the binomial
    covariance ``Cov(log S_i, log S_j) = (1 - S_i) / (n S_i)`` for
    ``t_i <= t_j``.  ``ci_half`` is the 95% half-width.
    """
    lo, hi = float(window[0]), float(window[1])
    if not 0 < lo < hi:
        raise InvalidParameter("window must satisfy 0 < t_lo < t_hi")
    g = np.asarray(curve.t_grid)
    m = (g >= lo * (1 - 1e-12)) & (g <= hi * (1 + 1e-12))
    if m.sum() < 5:
        raise InsufficientCoverage(f"only {int(m.sum())} grid points in [{lo}, {hi}]; need 5")
    s = np.asarray(curve.survival)[m]
    if np.any(s <= 0):
        raise ZeroSurvival("survival is zero inside the fit window")
    x = np.log(g[m])
    y = np.log(s)
    n = max(curve.n, 1)
    w = n * s / np.maximum(1 - s, 1.0 / n)
    W = w.sum()
    xb = (w * x).sum() / W
    yb = (w * y).sum() / W
    sxx = (w * (x - xb) ** 2).sum()
    slope = (w * (x - xb) * (y - yb)).sum() / sxx
    resid = y - yb - slope * (x - xb)
    ss_res = float((w * resid ** 2).sum())
    ss_tot = float((w * (y - yb) ** 2).sum())
    k = int(m.sum())
    c = w * (x - xb) / sxx
    v = (1 - s) / (n * s)
    idx = np.arange(k)
    cov = v[np.minimum.outer(idx, idx)]
    se_binom = math.sqrt(max(float(c @ cov @ c), 0.0))
    se = max(math.sqrt(ss_res / (k - 2) / sxx), se_binom)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(-slope), Z95 * se, (lo, hi), float(min(max(r2, 0.0), 1.0)), k, se)


# ------------------------------------------------------------------ layer cake


@dataclass(frozen=True)
class LayerCake:
    """Pieces of ``p int t^{p-1} S(t) dt``: below the grid, on it, and beyond it."""

    head: float
    body: float
    tail: float
    tail_exponent: float

    @property
    def value(self) -> float:
        return self.head + self.body + self.tail

    @property
    def extended(self) -> bool:
        return self.tail > 0


def layer_cake_parts(curve: TailCurve, p: float) -> LayerCake:
    """Trapezoid rule in ``u = t^p`` plus a power-law extension past the grid.

    Below the first grid point the survival is interpolated from 1 at ``t = 0``.
    Past the last point the tail is extended as ``S_max (t / t_max)^{-q}``
    with ``q`` fitted on the last decade of the grid.
    """
    if not p > 0:
        raise InvalidParameter("p must be positive")
    g = np.asarray(curve.t_grid, dtype=float)
    s = np.asarray(curve.survival, dtype=float)
    if g.size < 2:
        raise InsufficientCoverage("need at least two grid points")
    s_max = float(s[-1])
    if not s_max < 0.5:
        raise InsufficientCoverage("survival must drop below 1/2 by the end of the grid")
    u = g ** p
    head = u[0] * (1.0 + s[0]) / 2.0
    body = float(np.sum(np.diff(u) * (s[1:] + s[:-1]) / 2.0))
    if s_max == 0.0:
        return LayerCake(head, body, 0.0, math.inf)
    t_max = float(g[-1])
    fit = hardy_fit(curve, (t_max / 10.0, t_max))
    q = fit.p_hat
    tail = math.inf if q <= p else p * s_max * t_max ** p / (q - p)
    return LayerCake(head, body, tail, q)


def layer_cake_check(curve: TailCurve, p: float) -> float:
    """Layer-cake value of ``E[T^p]`` for comparison with :func:`moment`."""
    return layer_cake_parts(curve, p).value


# ------------------------------------------------------------------ ratios


@dataclass(frozen=True)
class RatioCurve:
    """``P(T^U < t) / P(T^W < t)`` with delta-method 95% half-widths."""

    t: np.ndarray
    ratio: np.ndarray
    ci_half: np.ndarray
    reliable: np.ndarray

    def __iter__(self):
        return iter(zip(self.t, self.ratio, self.ci_half))

    def __len__(self):
        return len(self.t)

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(RATIO_COLUMNS)
            for t, r, c, ok in zip(self.t, self.ratio, self.ci_half, self.reliable):
                w.writerow((_fmt(t), _fmt(r), _fmt(c), int(ok)))
        return path


def read_ratio(path) -> RatioCurve:
    rows = _read_rows(path, RATIO_COLUMNS)
    a = np.array([[float(x) for x in r[:3]] for r in rows])
    return RatioCurve(a[:, 0], a[:, 1], a[:, 2], np.array([r[3] == "1" for r in rows]))


def fast_exit_ratio(curveU: TailCurve, curveW: TailCurve,
                    min_count: int = RELIABLE_COUNT) -> RatioCurve:
    """Ratio of fast-exit probabilities; points with fewer than ``min_count``
    denominator exits are flagged unreliable."""
    if len(curveU.t_grid) != len(curveW.t_grid) or not np.allclose(
            curveU.t_grid, curveW.t_grid, rtol=1e-12, atol=0):
        raise GridMismatch("tail curves live on different grids")
    kU = curveU.exited.astype(float)
    kW = curveW.exited.astype(float)
    if np.all(kW == 0):
        raise DegenerateDenominator("no exits in the denominator sample on this grid")
    fU = kU / curveU.n
    fW = kW / curveW.n
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(kW > 0, fU / fW, np.nan)
        var_log = np.where((kU > 0) & (kW > 0),
                           (1 - fU) / np.maximum(kU, 1) + (1 - fW) / np.maximum(kW, 1),
                           np.inf)
        ci = Z95 * ratio * np.sqrt(var_log)
    reliable = (kW >= min_count) & (kU > 0)
    return RatioCurve(np.asarray(curveU.t_grid, float), ratio, ci, reliable)


def survival_ratio(curveW: TailCurve, curveU: TailCurve,
                   min_count: int = RELIABLE_COUNT) -> RatioCurve:
    """``P(T^W > t) / P(T^U > t)``; reliable where ``U`` keeps ``min_count`` survivors."""
    if len(curveU.t_grid) != len(curveW.t_grid) or not np.allclose(
            curveU.t_grid, curveW.t_grid, rtol=1e-12, atol=0):
        raise GridMismatch("tail curves live on different grids")
    kW = curveW.exceed.astype(float)
    kU = curveU.exceed.astype(float)
    if np.all(kU == 0):
        raise DegenerateDenominator("no survivors in the denominator sample on this grid")
    sW = kW / curveW.n
    sU = kU / curveU.n
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(kU > 0, sW / sU, np.nan)
        var_log = np.where((kW > 0) & (kU > 0),
                           (1 - sW) / np.maximum(kW, 1) + (1 - sU) / np.maximum(kU, 1), np.inf)
        ci = Z95 * ratio * np.sqrt(var_log)
    reliable = (kU >= min_count) & (kW > 0)
    return RatioCurve(np.asarray(curveW.t_grid, float), ratio, ci, reliable)
