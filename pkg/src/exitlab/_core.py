"""Compiled geometry and path kernels.

Domains are passed to the kernels as ``(kind, params)`` with ``params`` a flat
float64 array; :mod:`exitlab.geometry` builds these encodings.  All functions
here are nopython and release the GIL so batches can be split over threads.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .rng import step_block, PURPOSE_STEP

DISK, HALFPLANE, SLIT, WEDGE, STAR = 0, 1, 2, 3, 4

MAP_NONE, MAP_IDENTITY, MAP_KOEBE = -1, 0, 1

EXITED, CENSORED, MAXSTEPS = 0, 1, 2

GEOM_TOL = 1e-12
INF = math.inf


# ---------------------------------------------------------------- star domains
# params: [K, rho_min, rho_max, a_0..a_K, b_1..b_K, M, bx_0..bx_{M-1}, by_0..]


@njit(cache=True, nogil=True)
def star_rho(par, th):
    K = int(par[0])
    r = par[3]
    dr = 0.0
    ddr = 0.0
    for k in range(1, K + 1):
        a = par[3 + k]
        b = par[3 + K + k]
        ck = math.cos(k * th)
        sk = math.sin(k * th)
        r += a * ck + b * sk
        dr += k * (b * ck - a * sk)
        ddr -= k * k * (a * ck + b * sk)
    return r, dr, ddr


@njit(cache=True, nogil=True)
def _table_d2(par, off, M, j, x, y):
    j %= M
    dx = par[off + 1 + j] - x
    dy = par[off + 1 + M + j] - y
    return dx * dx + dy * dy


@njit(cache=True, nogil=True)
def _star_refine(par, x, y, jb, step):
    """Squared distance and foot of the closest curve point with angle within one table step."""
    lo = (jb - 1) * step
    hi = (jb + 1) * step
    th = jb * step
    # safeguarded Newton on the squared distance along the boundary curve
    for _ in range(8):
        r, dr, ddr = star_rho(par, th)
        c = math.cos(th)
        s = math.sin(th)
        gx = r * c - x
        gy = r * s - y
        t1x = dr * c - r * s
        t1y = dr * s + r * c
        t2x = ddr * c - 2.0 * dr * s - r * c
        t2y = ddr * s + 2.0 * dr * c - r * s
        f1 = gx * t1x + gy * t1y
        f2 = t1x * t1x + t1y * t1y + gx * t2x + gy * t2y
        # converged once the Newton step drops below the angle resolution
        if f2 > 0.0 and abs(f1) < 1e-13 * f2:
            th -= f1 / f2
            break
        if f1 > 0.0:
            hi = th
        else:
            lo = th
        nt = th - f1 / f2 if f2 > 0.0 else 0.5 * (lo + hi)
        if not (lo < nt < hi):
            nt = 0.5 * (lo + hi)
        th = nt
    r, _, _ = star_rho(par, th)
    cx = r * math.cos(th)
    cy = r * math.sin(th)
    return (cx - x) ** 2 + (cy - y) ** 2, cx, cy


@njit(cache=True, nogil=True)
def _star_nearest(par, x, y):
    K = int(par[0])
    off = 4 + 2 * K
    M = int(par[off])
    step = 2.0 * math.pi / M
    best = INF
    bx = 0.0
    by = 0.0
    # refine every local minimum of the table: several can be nearly tied
    prev = _table_d2(par, off, M, M - 1, x, y)
    cur = _table_d2(par, off, M, 0, x, y)
    for j in range(M):
        nxt = _table_d2(par, off, M, j + 1, x, y)
        if cur <= prev and cur <= nxt:
            if cur < best:
                best = cur
                bx = par[off + 1 + j]
                by = par[off + 1 + M + j]
            d2, cx, cy = _star_refine(par, x, y, j, step)
            if d2 < best:
                best = d2
                bx = cx
                by = cy
        prev = cur
        cur = nxt
    d = math.sqrt(best)
    if d > 0.0:
        nx = (x - bx) / d
        ny = (y - by) / d
    else:
        rr = math.hypot(bx, by)
        nx = -bx / rr
        ny = -by / rr
    return d, bx, by, nx, ny


# ---------------------------------------------------------------- wedge helper


@njit(cache=True, nogil=True)
def _ray_nearest(wx, wy, ex, ey):
    """Nearest point on the ray {s*(ex, ey): s >= 0} to (wx, wy)."""
    proj = wx * ex + wy * ey
    if proj <= 0.0:
        return math.hypot(wx, wy), 0.0, 0.0
    fx = proj * ex
    fy = proj * ey
    return math.hypot(wx - fx, wy - fy), fx, fy


# ---------------------------------------------------------------- dispatchers


@njit(cache=True, nogil=True)
def inside(kind, par, x, y):
    """Open-set membership without the boundary tolerance (cheap kernel test)."""
    if kind == DISK:
        return x * x + y * y < par[0] * par[0]
    if kind == HALFPLANE:
        return x * par[1] + y * par[2] < par[0]
    if kind == SLIT:
        wx = x * par[1] + y * par[2]
        wy = -x * par[2] + y * par[1]
        return not (wy == 0.0 and wx >= par[0])
    if kind == WEDGE:
        wx = x * par[1] + y * par[2]
        wy = -x * par[2] + y * par[1]
        if wx == 0.0 and wy == 0.0:
            return False
        return abs(math.atan2(wy, wx)) < par[0]
    # STAR
    r = math.hypot(x, y)
    if r < par[1]:
        return True
    if r >= par[2]:
        return False
    rho, _, _ = star_rho(par, math.atan2(y, x))
    return r < rho


@njit(cache=True, nogil=True)
def nearest(kind, par, x, y):
    """Distance to the boundary, nearest boundary point, inward unit normal.

    For the disk and half-plane the distance is signed (negative outside); the
    other variants return the unsigned distance.
    """
    if kind == DISK:
        r = par[0]
        rr = math.hypot(x, y)
        if rr == 0.0:
            return r, r, 0.0, -1.0, 0.0
        ux = x / rr
        uy = y / rr
        return r - rr, r * ux, r * uy, -ux, -uy
    if kind == HALFPLANE:
        c = par[1]
        s = par[2]
        d = par[0] - (x * c + y * s)
        return d, x + d * c, y + d * s, -c, -s
    if kind == SLIT:
        a = par[0]
        c = par[1]
        s = par[2]
        wx = x * c + y * s
        wy = -x * s + y * c
        if wx >= a:
            d = abs(wy)
            fwx = wx
            nwx = 0.0
            nwy = 1.0 if wy >= 0.0 else -1.0
        else:
            d = math.hypot(wx - a, wy)
            fwx = a
            nwx = (wx - a) / d
            nwy = wy / d
        return d, fwx * c, fwx * s, nwx * c - nwy * s, nwx * s + nwy * c
    if kind == WEDGE:
        c = par[1]
        s = par[2]
        ct = par[3]
        st = par[4]
        wx = x * c + y * s
        wy = -x * s + y * c
        d1, f1x, f1y = _ray_nearest(wx, wy, ct, st)
        d2, f2x, f2y = _ray_nearest(wx, wy, ct, -st)
        if d1 <= d2:
            d = d1
            fx = f1x
            fy = f1y
            if f1x == 0.0 and f1y == 0.0:
                nx = wx / d
                ny = wy / d
            else:
                nx = st
                ny = -ct
        else:
            d = d2
            fx = f2x
            fy = f2y
            if f2x == 0.0 and f2y == 0.0:
                nx = wx / d
                ny = wy / d
            else:
                nx = st
                ny = ct
        return d, fx * c - fy * s, fx * s + fy * c, nx * c - ny * s, nx * s + ny * c
    return _star_nearest(par, x, y)


@njit(cache=True, nogil=True)
def project(kind, par, x, y):
    """A boundary point attributed to (x, y); used for exit positions."""
    if kind == DISK:
        rr = math.hypot(x, y)
        if rr == 0.0:
            return par[0], 0.0
        return par[0] * x / rr, par[0] * y / rr
    if kind == HALFPLANE:
        d = par[0] - (x * par[1] + y * par[2])
        return x + d * par[1], y + d * par[2]
    if kind == SLIT:
        c = par[1]
        s = par[2]
        wx = max(x * c + y * s, par[0])
        return wx * c, wx * s
    if kind == WEDGE:
        c = par[1]
        s = par[2]
        ct = par[3]
        st = par[4]
        wx = x * c + y * s
        wy = -x * s + y * c
        d1, f1x, f1y = _ray_nearest(wx, wy, ct, st)
        d2, f2x, f2y = _ray_nearest(wx, wy, ct, -st)
        if d2 < d1:
            f1x = f2x
            f1y = f2y
        return f1x * c - f1y * s, f1x * s + f1y * c
    th = math.atan2(y, x)
    rho, _, _ = star_rho(par, th)
    return rho * math.cos(th), rho * math.sin(th)


# ---------------------------------------------------------------- maps


@njit(cache=True, nogil=True)
def map_derivs(mkind, mc, ms, x, y):
    """|f'(z)|^2 and |f''(z)|^2 for the catalog maps (rotated Koebe or identity)."""
    if mkind != MAP_KOEBE:
        return 1.0, 0.0
    zx = mc * x - ms * y
    zy = ms * x + mc * y
    a2 = (1.0 - zx) ** 2 + zy * zy  # |1 - z|^2
    b2 = (1.0 + zx) ** 2 + zy * zy  # |1 + z|^2
    c2 = (4.0 + 2.0 * zx) ** 2 + 4.0 * zy * zy  # |4 + 2z|^2
    return b2 / (a2 * a2 * a2), c2 / (a2 * a2 * a2 * a2)


# ---------------------------------------------------------------- path kernel


@njit(cache=True, nogil=True, inline="always")
def _chart_re(qx, qy):
    """Re sqrt(q) for the principal branch, cancellation-free."""
    m = math.hypot(qx, qy)
    if qx >= 0.0:
        return math.sqrt(0.5 * (m + qx))
    den = math.sqrt(0.5 * (m - qx))
    return abs(qy) / (2.0 * den) if den > 0.0 else 0.0


@njit(cache=True, nogil=True)
def run_path(kind, par, x, y, h0, lam, hmin, max_steps, t_max,
             mkind, mc, ms, kappa, seed, pid):
    """Simulate one path to its first exit.

    Returns ``(time, nu, ex, ey, steps, bridged, refined, status)``.  ``time``
    is the exit time of the simulated (domain) motion; ``nu`` the accumulated
    image time ``int |f'(Z)|^2 dt`` when a map is given, else equal to ``time``.
    With a map the horizon ``t_max`` applies to ``nu``.
    """
    tc = mkind != MAP_NONE
    slit = kind == SLIT
    star = kind == STAR
    rin = par[1] if star else 0.0
    a = c = s = tip_zone = 0.0
    if slit:
        a = par[0]
        c = par[1]
        s = par[2]
        x, y = x * c + y * s, -x * s + y * c
        tip_zone = 4.0 * math.sqrt(h0)
    t = 0.0
    nu = 0.0
    steps = 0
    bridged = False
    refined = False
    status = CENSORED
    t_exit = INF
    nu_exit = INF
    ex = math.nan
    ey = math.nan
    fx = fy = nx = ny = 0.0
    g0 = 1.0
    while True:
        if steps >= max_steps:
            status = MAXSTEPS
            t_exit = math.nan
            nu_exit = math.nan
            break
        # deep inside the inscribed disk of a star domain the step is h0
        # whatever the exact distance, so the nearest-point search can wait
        deep = -1.0
        if star:
            deep = rin - math.hypot(x, y)
            if lam * deep * deep < h0:
                deep = -1.0
        if slit:
            dtip = math.hypot(x - a, y)
            d0 = abs(y) if x >= a else dtip
            # the chart is strongly curved near the tip: much finer steps there
            lam_e = 0.1 * lam if dtip < tip_zone else lam
        elif deep > 0.0:
            d0 = deep
            lam_e = lam
        else:
            d0, fx, fy, nx, ny = nearest(kind, par, x, y)
            lam_e = lam
        h = min(h0, lam_e * d0 * d0)
        floor = hmin
        if tc:
            g0, f2 = map_derivs(mkind, mc, ms, x, y)
            hc = h
            if g0 * hc > h0:
                hc = h0 / g0
            if f2 > 0.0:
                lim = 2.0 * kappa * max(g0, 1.0) / f2
                if lim < hc:
                    hc = lim
            if hc < h:
                refined = True
                h = hc
            floor = hmin / max(1.0, g0)
        if h < floor:
            h = floor
        last = False
        if tc:
            # the midpoint rule can overshoot the horizon inside a step
            if nu >= t_max:
                break
            if nu + g0 * h >= t_max:
                h = (t_max - nu) / g0
                last = True
        elif t + h >= t_max:
            h = t_max - t
            last = True
        g1, g2, u1, u2 = step_block(seed, pid, steps, PURPOSE_STEP)
        sh = math.sqrt(h)
        x1 = x + sh * g1
        y1 = y + sh * g2
        frac = -1.0
        if slit:
            if (y <= 0.0 <= y1 or y1 <= 0.0 <= y) and y != y1:
                w = y / (y - y1)
                xc = x + (x1 - x) * w
                if xc >= a:
                    frac = w
                    ex = xc
                    ey = 0.0
            if frac < 0.0:
                c0 = _chart_re(a - x, -y)
                c1 = _chart_re(a - x1, -y1)
                mx = 0.5 * (x + x1)
                my = 0.5 * (y + y1)
                # chart speed |d sqrt(a - w)/dw|^2 = 1/(4|a - w|), endpoint average
                inv = 0.5 * (1.0 / math.hypot(a - x, y) + 1.0 / math.hypot(a - x1, y1))
                p = math.exp(-8.0 * c0 * c1 / (inv * h))
                if u1 < p:
                    bridged = True
                    frac = u2
                    ex = mx if mx >= a else a
                    ey = 0.0
        else:
            skip = False
            if deep > 0.0:
                inc = math.hypot(x1 - x, y1 - y)
                # crossing probability below exp(-40), under the smallest uniform
                if deep > inc and 2.0 * deep * (deep - inc) > 40.0 * h:
                    skip = True
                else:
                    d0, fx, fy, nx, ny = nearest(kind, par, x, y)
            s1 = (x1 - fx) * nx + (y1 - fy) * ny
            if skip:
                pass
            elif not inside(kind, par, x1, y1):
                frac = d0 / (d0 - s1) if s1 < 0.0 else 1.0
                if frac > 1.0:
                    frac = 1.0
                ex, ey = project(kind, par, x + frac * (x1 - x), y + frac * (y1 - y))
            else:
                p = math.exp(-2.0 * d0 * s1 / h) if s1 > 0.0 else 1.0
                if u1 < p:
                    bridged = True
                    frac = u2
                    mx = 0.5 * (x + x1)
                    my = 0.5 * (y + y1)
                    if inside(kind, par, mx, my):
                        _, ex, ey, _, _ = nearest(kind, par, mx, my)
                    else:
                        ex, ey = project(kind, par, mx, my)
        if tc:
            gm, fm = map_derivs(mkind, mc, ms, 0.5 * (x + x1), 0.5 * (y + y1))
            dnu = h * gm + 0.5 * h * h * fm
        else:
            dnu = h
        steps += 1
        if frac >= 0.0:
            t_exit = t + frac * h
            nu_exit = nu + frac * dnu
            status = EXITED
            break
        t += h
        nu += dnu
        x = x1
        y = y1
        if last:
            break
    if slit and status == EXITED:
        ex, ey = ex * c - ey * s, ex * s + ey * c
    if not tc:
        nu_exit = t_exit
    return t_exit, nu_exit, ex, ey, steps, bridged, refined, status


@njit(cache=True, nogil=True)
def run_range(kind, par, x, y, h0, lam, hmin, max_steps, t_max,
              mkind, mc, ms, kappa, seed, lo, hi,
              out_t, out_nu, out_x, out_y, out_steps, out_flags, out_status):
    """Simulate path ids ``lo..hi-1`` writing into slot ``pid - lo``."""
    for pid in range(lo, hi):
        r = run_path(kind, par, x, y, h0, lam, hmin, max_steps, t_max,
                     mkind, mc, ms, kappa, seed, pid)
        j = pid - lo
        out_t[j] = r[0]
        out_nu[j] = r[1]
        out_x[j] = r[2]
        out_y[j] = r[3]
        out_steps[j] = r[4]
        out_flags[j] = (1 if r[5] else 0) | (2 if r[6] else 0)
        out_status[j] = r[7]
