"""Monte Carlo checks of the fast-exit and long-stay comparison results.

Each ``verify_*`` function simulates the domains involved, writes its tail and
ratio tables when given an output directory, and returns a :class:`Verdict`.
A verdict is a list of rows, each of which records what was measured, what it
was compared with, and whether the comparison held at the stated tolerance.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
import math
from pathlib import Path

import numpy as np

from ..errors import InsufficientSamples, InvalidParameter
from ..estimators import (Z95, empirical_tail, fast_exit_ratio, hardy_fit, moment,
                          RELIABLE_COUNT, survival_ratio, TailCurve)
from ..geometry import Disk, SlitPlane, StarLikeTest, Wedge, star_like
from ..oracles import (eps_admissible, halfplane_survival, quarterplane_survival,
                       slit_fast_exit_lower_bound, slit_moment, wedge_survival)
from ..sampler import StepConfig, batch
from ..timechange import get_map, invariance_check, nu_batch, nu_values
from .config import GridSpec

VERDICT_COLUMNS = ("check_id", "quantity", "observed", "target", "se_units", "passed")

SIGMA = 3.0


@dataclass(frozen=True)
class VerdictRow:
    check_id: str
    quantity: str
    observed: float
    target: float
    se_units: float
    passed: bool

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        se = "" if math.isnan(self.se_units) else f" ({self.se_units:+.2f} SE)"
        return f"[{mark}] {self.check_id}: {self.quantity} = {self.observed:.6g}" \
               f" vs {self.target:.6g}{se}"


@dataclass
class Verdict:
    name: str
    rows: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def add(self, row: VerdictRow):
        self.rows.append(row)

    def write(self, out) -> Path:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        for fname, table in self.tables.items():
            table.to_csv(out / fname)
        return write_verdicts(self.rows, out / "verdicts.csv")

    def report(self) -> str:
        return "\n".join(r.line() for r in self.rows)


@dataclass(frozen=True)
class Table:
    """Rows of plain numbers with a header; floats round-trip exactly."""

    columns: tuple
    rows: list

    def to_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for r in self.rows:
                w.writerow(tuple(repr(float(v)) if isinstance(v, (float, np.floating)) else int(v)
                                 for v in r))
        return path


def write_verdicts(rows, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(VERDICT_COLUMNS)
        for r in rows:
            w.writerow((r.check_id, r.quantity, repr(float(r.observed)), repr(float(r.target)),
                        repr(float(r.se_units)), int(r.passed)))
    return path


def _z(diff, se):
    if se > 0:
        return diff / se
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


def at_least(check_id, quantity, observed, target, se, k=SIGMA) -> VerdictRow:
    """``observed >= target - k se``."""
    z = _z(observed - target, se)
    return VerdictRow(check_id, quantity, observed, target, z, bool(z >= -k))


def at_most(check_id, quantity, observed, target, se, k=SIGMA) -> VerdictRow:
    """``observed <= target + k se``."""
    z = _z(observed - target, se)
    return VerdictRow(check_id, quantity, observed, target, z, bool(z <= k))


def above_one(check_id, quantity, rc, i) -> VerdictRow:
    """A ratio point strictly above 1 (the SE column is informative only)."""
    r = float(rc.ratio[i])
    return VerdictRow(check_id, quantity, r, 1.0, _z(r - 1.0, float(rc.ci_half[i]) / Z95),
                      r > 1.0)


def _binomial_se(curve: TailCurve) -> np.ndarray:
    return curve.ci_half / Z95


def _worst(z: np.ndarray, sign: float) -> int:
    """Index of the least favourable entry (largest ``sign * z``)."""
    return int(np.argmax(sign * z))


# ------------------------------------------------------------------ fast exits


def max_admissible_eps(alpha: float) -> float:
    """Positive root of ``eps^2 + (alpha + eps)^2 = 1/2 - eps``."""
    b = 2 * alpha + 1
    c = alpha * alpha - 0.5
    return (-b + math.sqrt(b * b - 8 * c)) / 4


def check_eps(alpha: float, eps: float):
    if not eps_admissible(alpha, eps):
        raise InvalidParameter(
            f"eps={eps} violates eps^2 + (alpha+eps)^2 < 1/2 - eps for alpha={alpha}; "
            f"choose eps below {max_admissible_eps(alpha):.4g}")


def verify_theorem2(alpha: float = 0.5, n: int = 2_000_000, seed: int = 1,
                    grid: GridSpec = GridSpec(0.06, 0.3, 40), h0: float = 1e-3,
                    lam: float = 0.5, eps: float = 0.05, workers: int = 1) -> Verdict:
    """Slit plane ``K_alpha`` against the unit disk at small times.

    Rows: the ratio of fast-exit probabilities exceeds 1 at the smallest
    reliable time; it grows as ``t`` decreases; and the slit exit probability
    clears the explicit lower bound.
    """
    if not 0 < alpha < 1 / math.sqrt(2):
        raise InvalidParameter("alpha must lie in (0, 1/sqrt(2))")
    check_eps(alpha, eps)
    g = grid.points()
    # only P(T <= t) on the grid is needed, so paths stop at its end
    cfg = StepConfig(h0=h0, lam=lam, t_max=float(g[-1]))
    cu = empirical_tail(batch(SlitPlane(alpha), 0j, cfg, seed, n, workers).times(), g)
    cw = empirical_tail(batch(Disk(1.0), 0j, cfg, seed, n, workers).times(), g)
    if cw.exited.max() < RELIABLE_COUNT:
        raise InsufficientSamples(f"no grid point has {RELIABLE_COUNT} disk exits; raise n")
    rc = fast_exit_ratio(cu, cw)
    rel = np.flatnonzero(rc.reliable)
    v = Verdict("verify-theorem2", tables={"tail_slit.csv": cu, "tail_disk.csv": cw,
                                           "ratio.csv": rc})
    i0 = rel[0]
    v.add(above_one("T2a", f"ratio at t={g[i0]:.4g}", rc, i0))
    r = rc.ratio[rel]
    bad = int(np.count_nonzero(np.diff(r) >= 0))
    v.add(VerdictRow("T2b", f"monotonicity violations over {rel.size} reliable points",
                     bad, 0, math.nan, bad == 0))
    bound = np.array([slit_fast_exit_lower_bound(alpha, eps, t) for t in g])
    v.tables["lower_bound.csv"] = Table(("t", "value"), list(zip(g, bound)))
    z = np.array([_z(f - b, s) for f, b, s in zip(cu.cdf, bound, _binomial_se(cu))])
    j = _worst(z, -1.0)
    v.add(at_least("T2c", f"P(T<=t) at t={g[j]:.4g}", float(cu.cdf[j]), float(bound[j]),
                   float(_binomial_se(cu)[j])))
    return v


def scaled_star(name: str, d: float) -> StarLikeTest:
    """A catalog star domain rescaled so that its distance to the origin is ``d``."""
    s = star_like(name)
    c = d / s.rho_min
    return StarLikeTest(tuple(c * a for a in s.cos_coeffs), tuple(c * b for b in s.sin_coeffs),
                        name=s.name)


def _comparison_domain(name: str, alpha: float):
    if name == "slit":
        # a rotated copy of the slit plane: the equality case
        return SlitPlane(alpha, math.pi / 3)
    return scaled_star(name, alpha)


def verify_reflection_lemma(alpha: float = 0.5, stars=("limacon", "long_limacon"),
                            n: int = 100_000, seed: int = 1,
                            grid: GridSpec = GridSpec(0.1, 10.0, 20), h0: float = 4e-3,
                            lam: float = 0.5, workers: int = 1) -> Verdict:
    """Star domains with ``d(U) = alpha`` against ``K_alpha``.

    Two rows per domain: survival is dominated by the slit plane's, and the
    fast-exit probability is at least half the slit plane's.
    """
    if not alpha > 0:
        raise InvalidParameter("alpha must be positive")
    g = grid.points()
    cfg = StepConfig(h0=h0, lam=lam, t_max=float(g[-1]))
    ck = empirical_tail(batch(SlitPlane(alpha), 0j, cfg, seed, n, workers).times(), g)
    if ck.exited.max() == 0:
        raise InsufficientSamples("no slit-plane exits on the grid")
    v = Verdict("verify-reflect", tables={"tail_slit.csv": ck})
    sk = _binomial_se(ck)
    for name in stars:
        cu = empirical_tail(batch(_comparison_domain(name, alpha), 0j, cfg, seed, n,
                                  workers).times(), g)
        v.tables[f"tail_{name}.csv"] = cu
        su = _binomial_se(cu)
        joint = np.sqrt(su ** 2 + sk ** 2)
        z = np.array([_z(a - b, s) for a, b, s in zip(cu.survival, ck.survival, joint)])
        j = _worst(z, 1.0)
        v.add(at_most(f"syme:{name}", f"P(T>t) at t={g[j]:.4g}", float(cu.survival[j]),
                      float(ck.survival[j]), float(joint[j])))
        half = 0.5 * ck.cdf
        joint = np.sqrt(su ** 2 + 0.25 * sk ** 2)
        z = np.array([_z(a - b, s) for a, b, s in zip(cu.cdf, half, joint)])
        j = _worst(z, -1.0)
        v.add(at_least(f"reflect:{name}", f"P(T<=t) at t={g[j]:.4g}", float(cu.cdf[j]),
                       float(half[j]), float(joint[j])))
    return v


# ------------------------------------------------------------------ long stays


@lru_cache(maxsize=16)
def wedge_times(theta: float, r: float, n: int, seed: int, h0: float, lam: float,
                t_max: float, workers: int = 1) -> np.ndarray:
    """Exit times from ``r`` on the wedge axis; cached so wedge pairs can share runs."""
    w = Wedge(theta)
    out = batch(w, w.axis_point(r), StepConfig(h0=h0, lam=lam, t_max=t_max), seed, n,
                workers).times()
    out.flags.writeable = False
    return out


def wedge_oracle(theta: float, r: float, t: float) -> float:
    """Exact survival from ``r`` on the axis; closed forms for the half and quarter plane."""
    if math.isclose(theta, math.pi / 2):
        return halfplane_survival(r, t)
    if math.isclose(theta, math.pi / 4):
        # coordinates r / sqrt(2) each: rescale the formula for the start 1 + i
        return quarterplane_survival(2.0 * t / (r * r))
    return wedge_survival(theta, r, t)


def _fit_window(curve: TailCurve, window):
    """Shrink the window to the last grid point with positive survival."""
    g = curve.t_grid
    pos = g[(curve.survival > 0) & (g <= window[1] * (1 + 1e-12))]
    hi = float(pos[-1]) if pos.size else float(window[0])
    return (float(window[0]), min(float(window[1]), hi))


def _exact_slope(theta, r, g, n, window):
    """Slope of the exact survival under the same weighted fit (what the fit estimates)."""
    s = np.array([wedge_oracle(theta, r, t) for t in g])
    return hardy_fit(TailCurve(g, s, np.zeros_like(s), n), window).p_hat


def verify_prop_t3(theta_u: float = math.pi / 4, theta_w: float = math.pi / 2,
                   n: int = 100_000, seed: int = 1, grid: GridSpec = GridSpec(5.0, 50.0, 12),
                   window=(5.0, 50.0), r: float = 1.0, h0: float = 5e-3, lam: float = 0.5,
                   tol: float = 0.15, workers: int = 1) -> Verdict:
    """Two wedges started on their axes at distance ``r``.

    Rows: the survival ratio ``W / U`` does not decrease along the grid; each
    tail agrees with its exact survival; each fitted exponent lies within
    ``tol`` of ``pi / (4 theta)``; and each fit's confidence interval covers the
    slope of the exact survival over the same window.
    """
    if not 0 < theta_u <= theta_w < math.pi:
        raise InvalidParameter("need 0 < theta_u <= theta_w < pi")
    g = grid.points()
    t_max = float(g[-1])
    curves = {}
    for tag, th in (("U", theta_u), ("W", theta_w)):
        curves[tag] = empirical_tail(wedge_times(th, r, n, seed, h0, lam, t_max, workers), g)
    v = Verdict("verify-prop-t3", tables={"tail_U.csv": curves["U"], "tail_W.csv": curves["W"]})
    cu, cw = curves["U"], curves["W"]
    rc = survival_ratio(cw, cu)
    ok = rc.reliable
    if ok.sum() < 2:
        raise InsufficientSamples(f"fewer than two grid points with {RELIABLE_COUNT} "
                                  "survivors in the thinner wedge")
    v.tables["ratio.csv"] = rc
    bad = int(np.count_nonzero(np.diff(rc.ratio[ok]) < 0))
    v.add(VerdictRow("T3:ratio", f"decreases over {int(ok.sum())} reliable points", bad, 0,
                     math.nan, bad == 0))
    for tag, th in (("U", theta_u), ("W", theta_w)):
        c = curves[tag]
        exact = np.array([wedge_oracle(th, r, t) for t in g])
        v.tables[f"oracle_{tag}.csv"] = Table(("t", "value"), list(zip(g, exact)))
        se = np.sqrt(exact * (1 - exact) / c.n)
        z = np.array([_z(a - b, s) for a, b, s in zip(c.survival, exact, se)])
        j = _worst(np.abs(z), 1.0)
        v.add(VerdictRow(f"oracle:{tag}", f"P(T>t) at t={g[j]:.4g}, theta={th:.4g}",
                         float(c.survival[j]), float(exact[j]), float(z[j]),
                         bool(abs(z[j]) <= SIGMA)))
        H = math.pi / (4 * th)
        win = _fit_window(c, window)
        fit = hardy_fit(c, win)
        v.add(VerdictRow(f"hardy:{tag}", f"fitted exponent on [{win[0]:.3g}, {win[1]:.3g}]",
                         fit.p_hat, H, _z(fit.p_hat - H, fit.stderr),
                         bool(abs(fit.p_hat - H) <= tol)))
        slope = _exact_slope(th, r, g, c.n, win)
        v.add(VerdictRow(f"hardy_ci:{tag}", "fit interval covers the exact window slope",
                         fit.p_hat, slope, _z(fit.p_hat - slope, fit.stderr),
                         bool(fit.covers(slope))))
    return v


# ------------------------------------------------------------------ time change


def uncapped_config(lam: float = 0.5) -> StepConfig:
    """Step control for whole-path image times: no fixed step cap, no horizon."""
    return StepConfig(h0=1e30, lam=lam, h_min=1e-300)


def verify_timechange(n: int = 100_000, seed: int = 1,
                      grid: GridSpec = GridSpec(0.01, 1.0, 15), h0: float = 1e-3,
                      lam: float = 0.5, p_values=(0.1, 0.2), p_div: float = 0.3,
                      workers: int = 1) -> Verdict:
    """Time-changed disk motion against direct exits from the image domain.

    Rows: identity and Koebe tails agree with direct exits; moment comparisons
    between the identity and the Koebe map; the heavy-tail flag at ``p_div``;
    and the small-time reversal of the tail comparison.
    """
    g = grid.points()
    cfg = StepConfig(h0=h0, lam=lam, t_max=float(g[-1]))
    v = Verdict("verify-timechange")
    ident = invariance_check(get_map("identity"), StepConfig(h0=h0, lam=lam), seed, n, g,
                             workers)
    v.add(VerdictRow("inv:identity", "max tail discrepancy (SE)", ident.max_discrepancy, 0.0,
                     math.nan, ident.max_discrepancy == 0.0))
    koebe = get_map("koebe")
    inv = invariance_check(koebe, cfg, seed, n, g, workers)
    j = int(np.argmax(np.abs(inv.discrepancy)))
    v.add(VerdictRow("inv:koebe", f"tail discrepancy at t={g[j]:.4g} (SE)",
                     float(inv.discrepancy[j]), 0.0, float(inv.discrepancy[j]),
                     inv.max_discrepancy <= SIGMA))
    v.tables.update({"tail_nu_identity.csv": ident.nu_tail, "tail_nu_koebe.csv": inv.nu_tail,
                     "tail_slit_direct.csv": inv.direct_tail})

    t_ident = nu_values(nu_batch(get_map("identity"), StepConfig(h0=h0, lam=lam), seed, n,
                                 workers))
    t_koebe = nu_values(nu_batch(koebe, uncapped_config(lam), seed, n, workers))
    for p in p_values:
        mi = moment(t_ident, p)
        mk = moment(t_koebe, p)
        joint = math.hypot(mi.stderr, mk.stderr)
        v.add(at_most(f"mcc:p={p:g}", "E[nu(I)^p] against E[nu(k)^p]", mi.value, mk.value,
                      joint))
        if 2 * p >= 0.25:
            # E[nu(k)^(2p)] is infinite, so no standard error means anything
            continue
        v.add(VerdictRow(f"moment:koebe p={p:g}", "E[nu(k)^p] against the exact slit moment",
                         mk.value, slit_moment(0.25, p),
                         _z(mk.value - slit_moment(0.25, p), mk.stderr),
                         abs(_z(mk.value - slit_moment(0.25, p), mk.stderr)) <= SIGMA))
    md = moment(t_koebe, p_div)
    v.add(VerdictRow(f"div:koebe p={p_div:g}", "top-decile share of the estimate",
                     md.top_decile_share, 0.5, math.nan, md.divergence_flag))
    mid = moment(t_ident, p_div)
    v.add(VerdictRow(f"div:identity p={p_div:g}", "top-decile share of the estimate",
                     mid.top_decile_share, 0.5, math.nan, not mid.divergence_flag))

    if ident.nu_tail.exited.max() < RELIABLE_COUNT:
        raise InsufficientSamples(f"no grid point has {RELIABLE_COUNT} disk exits; raise n")
    rc = fast_exit_ratio(inv.nu_tail, ident.nu_tail)
    rel = np.flatnonzero(rc.reliable)
    i0 = rel[0]
    v.add(above_one("i2", f"P(nu(k)<=t)/P(nu(I)<=t) at t={g[i0]:.4g}", rc, i0))
    v.tables["ratio_koebe_identity.csv"] = rc
    return v
