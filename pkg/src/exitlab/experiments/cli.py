"""``exitlab`` command line.

Every subcommand accepts ``--config FILE`` (flat ``key = value``); flags win
over the file.  Tables are written under ``--out`` (default
``$EXITLAB_OUT/<command>`` or ``exitlab_out/<command>``).  The exit status is
1 when a verification row fails and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
from pathlib import Path
import sys

import numpy as np

from ..errors import ExitLabError, InvalidParameter
from ..estimators import empirical_tail, fast_exit_ratio, hardy_fit, moment, read_tail
from ..geometry import hardy_number
from ..sampler import batch, read_samples
from ..timechange import get_map, nu_batch, write_nu_csv
from . import explore, verify
from .config import (build_scenario, default_out, parse_angle, parse_floats, parse_grid,
                     read_config, Scenario)
from .plot import emit_plot

log = logging.getLogger("exitlab")

PI = math.pi


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("scenario")
    g.add_argument("--config", type=Path, help="flat key = value file; flags win")
    g.add_argument("--domain", choices=("disk", "halfplane", "slit", "wedge", "star", "koebe"))
    g.add_argument("--alpha", type=float, help="slit or half-plane distance")
    g.add_argument("--theta", type=parse_angle, help="wedge half-angle (accepts pi/4)")
    g.add_argument("--psi", type=parse_angle, help="slit direction or half-plane normal angle")
    g.add_argument("--r", type=float, help="disk radius, or start distance on a wedge axis")
    g.add_argument("--axis", type=parse_angle, help="wedge axis angle (default theta)")
    g.add_argument("--star", help="star-like test domain name")
    g.add_argument("--map", help="conformal map id (identity, koebe)")
    g.add_argument("--phi", type=parse_angle, help="map rotation")
    g.add_argument("--start", help="start point x,y")
    g.add_argument("--n", type=lambda v: int(float(v)), help="number of paths")
    g.add_argument("--seed", type=int)
    g.add_argument("--h0", type=float, help="largest Euler step")
    g.add_argument("--lambda", dest="lam", type=float, help="step fraction of dist^2")
    g.add_argument("--t-max", dest="t_max", type=float, help="censoring horizon")
    g.add_argument("--grid", help="geometric grid lo:hi:n")
    g.add_argument("--out", type=Path, help="output directory")
    g.add_argument("--workers", type=int, help="threads for the batch")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="exitlab", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        _common(p)
        return p

    cmd("simulate", "exit samples for one domain")
    p = cmd("tail", "survival table from samples or a fresh run")
    p.add_argument("--input", type=Path, help="sample CSV (otherwise simulate)")
    p = cmd("ratio", "fast-exit ratio of two tail tables")
    p.add_argument("--num", type=Path, required=True, help="numerator tail CSV")
    p.add_argument("--den", type=Path, required=True, help="denominator tail CSV")
    p = cmd("moments", "E[T^p] with jackknife errors and the heavy-tail flag")
    p.add_argument("--input", type=Path, help="sample CSV (otherwise simulate)")
    p.add_argument("--p", help="comma separated exponents")
    p = cmd("hardy", "power-law fit of a survival table")
    p.add_argument("--input", type=Path, help="tail CSV (otherwise simulate)")
    p.add_argument("--window", help="fit window lo,hi")
    cmd("timechange", "time-changed disk exits nu(f) for a catalog map")
    p = cmd("verify-theorem2", "slit plane against the disk at small times")
    p.add_argument("--eps", type=float, help="margin in the lower-bound construction")
    p = cmd("verify-reflect", "star domains against the slit plane")
    p.add_argument("--stars", help="comma separated star names (or slit)")
    p = cmd("verify-prop-t3", "long stays in two wedges")
    p.add_argument("--theta-u", dest="theta_u", type=parse_angle)
    p.add_argument("--theta-w", dest="theta_w", type=parse_angle)
    p.add_argument("--window", help="fit window lo,hi")
    p.add_argument("--tol", type=float, help="allowed exponent error")
    p = cmd("verify-timechange", "conformal invariance and moment comparisons")
    p.add_argument("--p", help="comma separated exponents")
    p = cmd("explore-conjecture1", "long-stay ratio trend (no verdict)")
    p.add_argument("--theta-u", dest="theta_u", type=parse_angle)
    p.add_argument("--theta-w", dest="theta_w", type=parse_angle)
    p.add_argument("--sweep", help="also sweep slit distances, comma separated")
    p = cmd("explore-conjecture2", "t^p P(T > t) above the Hardy number (no verdict)")
    p.add_argument("--p", help="comma separated exponents")
    p = cmd("plot", "SVG of a tail or ratio CSV")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--kind", choices=("tail", "ratio"))
    return ap


# per-command defaults, below the config file and the flags
DEFAULTS = {
    "verify-theorem2": dict(alpha=0.5, n=2_000_000, grid="0.06:0.3:40", h0=1e-3, eps=0.05),
    "verify-reflect": dict(alpha=0.5, n=100_000, grid="0.1:10:20", h0=4e-3,
                           stars="limacon,long_limacon"),
    "verify-prop-t3": dict(n=100_000, grid="5:50:12", h0=5e-3, theta_u=PI / 4,
                           theta_w=PI / 2, window="5,50", tol=0.15),
    "verify-timechange": dict(n=100_000, grid="0.01:1:15", h0=1e-3, p="0.1,0.2"),
    "explore-conjecture1": dict(n=100_000, grid="1:100:40", h0=5e-3, theta_u=PI / 4,
                                theta_w=PI / 2),
    "explore-conjecture2": dict(n=100_000, grid="1:100:40", h0=5e-3, theta=PI / 4,
                                p="1.05,1.1,1.25"),
    "timechange": dict(map="koebe", t_max=1.0),
}

EXTRA_ARGS = ("input", "num", "den", "p", "window", "eps", "stars", "theta_u", "theta_w",
              "tol", "sweep", "kind")


def scenario_from_args(args) -> tuple[Scenario, dict]:
    flags = {k: v for k, v in vars(args).items()
             if k not in ("command", "config", "verbose")}
    file_values = read_config(args.config) if args.config else {}
    defaults = dict(DEFAULTS.get(args.command, {}))
    sc, extra = build_scenario(args.command, file_values, flags, defaults)
    unknown = set(extra) - set(EXTRA_ARGS)
    if unknown:
        raise InvalidParameter(f"unknown settings: {', '.join(sorted(unknown))}")
    if flags.get("out") is None and "out" not in file_values:
        sc = sc.with_(out=default_out() / args.command)
    return sc, extra


def _pair(text) -> tuple:
    v = parse_floats(text)
    if len(v) != 2:
        raise InvalidParameter(f"expected lo,hi, got {text!r}")
    return v


DEFAULT_HORIZON = 10.0


def _unbounded(sc: Scenario) -> bool:
    try:
        return math.isfinite(hardy_number(sc.domain_spec()))
    except ExitLabError:
        return True


def horizon_config(sc: Scenario):
    """Step control for a fresh run.

    Exit times from unbounded domains have infinite mean, so an uncensored
    Euler run has no bounded cost; such runs stop at the end of the grid (or
    at ``DEFAULT_HORIZON``) unless ``--t-max`` is given.
    """
    if math.isfinite(sc.t_max) or not _unbounded(sc):
        return sc.step_config()
    t_max = sc.grid.hi if sc.grid is not None else DEFAULT_HORIZON
    print(f"unbounded domain: paths censored at t = {t_max:g} (set --t-max to change)")
    return sc.step_config(t_max=t_max)


def _samples(sc: Scenario, extra, cfg=None) -> np.ndarray:
    if extra.get("input"):
        return read_samples(extra["input"]).times()
    cfg = cfg or horizon_config(sc)
    return batch(sc.domain_spec(), sc.start_point(), cfg, sc.seed, sc.n, sc.workers).times()


def _write_rows(path: Path, columns, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        w.writerows(rows)
    return path


# ------------------------------------------------------------------ commands


def run_simulate(sc: Scenario, extra) -> int:
    b = batch(sc.domain_spec(), sc.start_point(), horizon_config(sc), sc.seed, sc.n,
              sc.workers)
    path = b.to_csv(sc.out / "samples.csv")
    t = b.times()
    fin = t[np.isfinite(t)]
    print(f"{len(b)} paths, {b.n_censored} censored, {b.n_maxsteps} over the step limit")
    if fin.size:
        print(f"mean exit time {fin.mean():.6g} (exits only), median {np.median(t):.6g}")
    print(f"wrote {path}")
    return 0


def run_tail(sc, extra) -> int:
    c = empirical_tail(_samples(sc, extra), sc.t_grid("0.05:100:40"))
    print(f"wrote {c.to_csv(sc.out / 'tail.csv')}")
    return 0


def run_ratio(sc, extra) -> int:
    rc = fast_exit_ratio(read_tail(extra["num"]), read_tail(extra["den"]))
    print(f"{int(rc.reliable.sum())} of {len(rc)} points reliable")
    print(f"wrote {rc.to_csv(sc.out / 'ratio.csv')}")
    return 0


def run_moments(sc, extra) -> int:
    cfg = None
    if not extra.get("input") and _unbounded(sc) and not math.isfinite(sc.t_max):
        # moments need whole paths: let steps grow with the distance to the boundary
        print("unbounded domain: steps not capped by h0 so that every path finishes")
        cfg = verify.uncapped_config(sc.lam)
    t = _samples(sc, extra, cfg)
    try:
        H = hardy_number(sc.domain_spec()) if not extra.get("input") else None
    except ExitLabError:
        H = None
    rows = []
    for p in parse_floats(extra.get("p") or "0.5,1"):
        m = moment(t, p, H)
        rows.append((repr(p), repr(m.value), repr(m.stderr), int(m.divergence_flag),
                     repr(m.top_decile_share)))
        print(f"p={p:g}: {m.value:.6g} +- {m.stderr:.3g}"
              f"{'  (heavy tail)' if m.divergence_flag else ''}")
    path = _write_rows(sc.out / "moments.csv",
                       ("p", "value", "stderr", "divergence_flag", "top_decile_share"), rows)
    print(f"wrote {path}")
    return 0


def run_hardy(sc, extra) -> int:
    if extra.get("input"):
        c = read_tail(extra["input"])
    else:
        c = empirical_tail(_samples(sc, extra), sc.t_grid("5:50:12"))
        c.to_csv(sc.out / "tail.csv")
    window = _pair(extra["window"]) if extra.get("window") else (float(c.t_grid[0]),
                                                                  float(c.t_grid[-1]))
    f = hardy_fit(c, window)
    print(f"p_hat = {f.p_hat:.4f} +- {f.ci_half:.4f} on [{window[0]:g}, {window[1]:g}],"
          f" {f.n_points} points, R^2 = {f.r_squared:.4f}")
    path = _write_rows(sc.out / "hardy.csv",
                       ("p_hat", "ci_half", "t_lo", "t_hi", "r_squared", "n_points"),
                       [(repr(f.p_hat), repr(f.ci_half), repr(window[0]), repr(window[1]),
                         repr(f.r_squared), f.n_points)])
    print(f"wrote {path}")
    return 0


def run_timechange(sc, extra) -> int:
    fmap = get_map(sc.map, sc.phi)
    b = nu_batch(fmap, sc.step_config(), sc.seed, sc.n, sc.workers)
    print(f"{len(b)} paths of nu({fmap.id}), {b.n_censored} censored at {sc.t_max:g}")
    print(f"wrote {write_nu_csv(b, sc.out / 'nu.csv')}")
    return 0


def _finish(v: verify.Verdict, sc: Scenario) -> int:
    path = v.write(sc.out)
    print(v.report())
    print(f"wrote {path}")
    return 0 if v.passed else 1


def run_verify_theorem2(sc, extra) -> int:
    return _finish(verify.verify_theorem2(sc.alpha, sc.n, sc.seed, sc.grid, sc.h0, sc.lam,
                                          float(extra["eps"]), sc.workers), sc)


def run_verify_reflect(sc, extra) -> int:
    stars = tuple(s.strip() for s in str(extra["stars"]).split(",") if s.strip())
    return _finish(verify.verify_reflection_lemma(sc.alpha, stars, sc.n, sc.seed, sc.grid,
                                                  sc.h0, sc.lam, sc.workers), sc)


def run_verify_prop_t3(sc, extra) -> int:
    return _finish(verify.verify_prop_t3(parse_angle(extra["theta_u"]),
                                         parse_angle(extra["theta_w"]), sc.n, sc.seed,
                                         sc.grid, _pair(extra["window"]), sc.r, sc.h0, sc.lam,
                                         float(extra["tol"]), sc.workers), sc)


def run_verify_timechange(sc, extra) -> int:
    return _finish(verify.verify_timechange(sc.n, sc.seed, sc.grid, sc.h0, sc.lam,
                                            parse_floats(extra["p"]), workers=sc.workers), sc)


def run_explore1(sc, extra) -> int:
    tab = explore.long_stay_trend(parse_angle(extra["theta_u"]),
                                  parse_angle(extra["theta_w"]), sc.n, sc.seed, sc.grid,
                                  sc.r, sc.h0, sc.lam, sc.workers)
    print(f"wrote {tab.to_csv(sc.out / 'ratio_trend.csv')}")
    if extra.get("sweep"):
        sw = explore.alpha_sweep(parse_floats(extra["sweep"]), sc.n, sc.seed,
                                 parse_grid("0.06:0.3:20"), min(sc.h0, 1e-3), sc.lam,
                                 sc.workers)
        print(f"wrote {sw.to_csv(sc.out / 'alpha_sweep.csv')}")
    return 0


def run_explore2(sc, extra) -> int:
    tab = explore.scaled_tail(sc.theta, parse_floats(extra["p"]), sc.n, sc.seed, sc.grid,
                              sc.r, sc.h0, sc.lam, sc.workers)
    print(f"wrote {tab.to_csv(sc.out / 'scaled_tail.csv')}")
    return 0


def run_plot(sc, extra) -> int:
    src = Path(extra["input"])
    out = sc.out / src.with_suffix(".svg").name
    print(f"wrote {emit_plot(src, extra.get('kind'), out)}")
    return 0


COMMANDS = {
    "simulate": run_simulate, "tail": run_tail, "ratio": run_ratio, "moments": run_moments,
    "hardy": run_hardy, "timechange": run_timechange,
    "verify-theorem2": run_verify_theorem2, "verify-reflect": run_verify_reflect,
    "verify-prop-t3": run_verify_prop_t3, "verify-timechange": run_verify_timechange,
    "explore-conjecture1": run_explore1, "explore-conjecture2": run_explore2,
    "plot": run_plot,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        sc, extra = scenario_from_args(args)
        log.info("scenario %s", sc)
        return COMMANDS[args.command](sc, extra)
    except ExitLabError as exc:
        print(f"exitlab {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
