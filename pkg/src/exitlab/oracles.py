"""Closed-form probabilities and bounds used as ground truth.

Besides the one-dimensional Gaussian identities, :func:`wedge_survival` gives
the exact survival function of a wedge of any opening (a Bessel series).  It
covers the half-plane, the quarter-plane and, with opening ``2 pi``, the slit
plane seen from its tip, which makes it the reference for the slit kernel.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate
from scipy.special import erf, erfc, ive

from .errors import InvalidParameter, NonpositiveVariance, QuadratureFailure

QUAD_RTOL = 1e-8
QUAD_LIMIT = 200


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise InvalidParameter("lower bound exceeds upper bound")

    def contains(self, v: float) -> bool:
        return self.lower <= v <= self.upper


def _positive(**kw):
    for name, v in kw.items():
        if not (v > 0 and math.isfinite(v)):
            raise InvalidParameter(f"{name} must be positive and finite, got {v}")


def _quad(f, a, b):
    # a fourth element is only returned when quad reports a problem
    val, _, _, *msg = integrate.quad(f, a, b, epsabs=0.0, epsrel=QUAD_RTOL,
                                     limit=QUAD_LIMIT, full_output=1)
    if msg:
        raise QuadratureFailure(f"quadrature did not reach rtol {QUAD_RTOL}: {msg[0]}")
    return val


def gaussian_density(x: float, s: float) -> float:
    """Heat kernel ``exp(-x^2 / 2s) / sqrt(2 pi s)``."""
    if not s > 0:
        raise NonpositiveVariance(f"variance must be positive, got {s}")
    return math.exp(-x * x / (2.0 * s)) / math.sqrt(2.0 * math.pi * s)


def halfplane_exit_cdf(a: float, t: float) -> float:
    """``P(tau_a <= t)`` for one-dimensional motion from 0, i.e. ``erfc(a / sqrt(2t))``."""
    _positive(a=a, t=t)
    return float(erfc(a / math.sqrt(2.0 * t)))


def halfplane_survival(a: float, t: float) -> float:
    _positive(a=a, t=t)
    return float(erf(a / math.sqrt(2.0 * t)))


def quarterplane_survival(t: float) -> float:
    """Survival in ``{x > 0, y > 0}`` from ``1 + i``: two independent coordinates."""
    _positive(t=t)
    return float(erf(1.0 / math.sqrt(2.0 * t))) ** 2


def gaussian_tail_sandwich(y: float) -> BoundPair:
    """Explicit bounds on ``int_y^inf exp(-x^2) dx``."""
    _positive(y=y)
    e = math.exp(-y * y)
    return BoundPair(y * e / (2.0 * y * y + 1.0), e / (2.0 * y))


def gaussian_tail(y: float) -> float:
    """``int_y^inf exp(-x^2) dx`` in closed form."""
    return 0.5 * math.sqrt(math.pi) * float(erfc(y))


def mcconnell_disk_rate(t: float, n: int) -> float:
    """``exp(-cos^2(pi/n) / 2t)``; the multiplicative constant is unknown and left out."""
    _positive(t=t)
    if int(n) != n or n < 3:
        raise InvalidParameter("n must be an integer >= 3")
    return math.exp(-math.cos(math.pi / n) ** 2 / (2.0 * t))


def prob_pos_then_neg(t: float) -> float:
    """``P(X_{t/2} > 0, X_t < 0)`` by quadrature over the midpoint value."""
    _positive(t=t)
    s = 0.5 * t
    sd = math.sqrt(s)
    # inner integral over the second increment is a Gaussian tail
    f = lambda y: gaussian_density(y, s) * 0.5 * float(erfc(y / math.sqrt(t)))
    return _quad(f, 0.0, 40.0 * sd)


def prob_zero_hit_second_half(t: float) -> float:
    """Probability of a zero in ``[t/2, t]``; the arcsine law makes it exactly 1/2."""
    _positive(t=t)
    u = 0.5 * t
    no_zero = 2.0 * math.atan2(math.sqrt(u), math.sqrt(t - u)) / math.pi
    return 1.0 - no_zero


def prob_stay_below(alpha: float, t: float) -> float:
    """``P(X_s <= -alpha`` for all ``s`` in ``[t/2, t])``."""
    _positive(alpha=alpha, t=t)
    s = 0.5 * t
    sd = math.sqrt(s)
    rt = math.sqrt(t)
    # u = -alpha - X_{t/2} >= 0; staying below then has probability erf(u / sqrt(t))
    f = lambda u: gaussian_density(alpha + u, s) * float(erf(u / rt))
    return _quad(f, 0.0, 40.0 * sd)


def slit_fast_exit_lower_bound(alpha: float, eps: float, t: float) -> float:
    """Independent-coordinate lower bound on ``P(T <= t)`` for the slit plane ``K_alpha``.

    Staying left of ``-alpha`` on ``[t/2, t]`` while the imaginary part
    vanishes somewhere in that window forces a hit of the slit.
    """
    if not 0 < alpha < 1 / math.sqrt(2):
        raise InvalidParameter("alpha must lie in (0, 1/sqrt(2))")
    _positive(eps=eps, t=t)
    return prob_stay_below(alpha, t) * prob_zero_hit_second_half(t)


def eps_admissible(alpha: float, eps: float) -> bool:
    """Whether ``eps^2 + (alpha + eps)^2 < 1/2 - eps``."""
    return eps > 0 and eps * eps + (alpha + eps) ** 2 < 0.5 - eps


# ------------------------------------------------------------------ wedges


def wedge_survival(theta: float, r: float, t: float, phi: float = 0.0) -> float:
    """``P(T > t)`` for the wedge ``|arg z| < theta`` started at ``r e^{i phi}``.

    Separation of variables gives, with opening ``A = 2 theta``,
    ``z = r^2 / 4t`` and ``nu_n = n pi / A``::

        sum_{n odd} 4/(n pi) sin(nu_n (phi + theta))
            * sqrt(pi z / 2) e^{-z} (I_{(nu_n-1)/2}(z) + I_{(nu_n+1)/2}(z))

    ``theta`` may be as large as ``pi`` (the plane minus a ray).
    """
    if not 0 < theta <= math.pi:
        raise InvalidParameter("wedge half-angle must lie in (0, pi]")
    _positive(r=r, t=t)
    if not abs(phi) < theta:
        raise InvalidParameter("start angle must lie inside the wedge")
    A = 2.0 * theta
    z = r * r / (4.0 * t)
    # terms die off once (nu/2)^2 >> 2z
    n_max = int(A / math.pi * (2.0 * math.sqrt(80.0 * z) + 40.0)) + 1
    n = np.arange(1, n_max + 1, 2, dtype=float)
    nu = n * math.pi / A
    terms = (4.0 / (n * math.pi)) * np.sin(nu * (phi + theta)) * (
        ive(0.5 * (nu - 1.0), z) + ive(0.5 * (nu + 1.0), z))
    return float(min(max(math.sqrt(0.5 * math.pi * z) * terms.sum(), 0.0), 1.0))


def slit_survival(alpha: float, t: float) -> float:
    """``P(T > t)`` for the plane minus ``(-inf, -alpha]`` started at 0."""
    _positive(alpha=alpha)
    return wedge_survival(math.pi, alpha, t)


def _wedge_tail_constant(theta: float, r: float) -> float:
    """``C`` in ``P(T > t) ~ C t^{-H}`` as ``t -> inf``, with ``H = pi / (4 theta)``."""
    nu = math.pi / (2.0 * theta)
    return (4.0 / math.pi) * math.sqrt(math.pi / 2.0) * 2.0 ** (-(nu - 1.0) / 2.0) \
        * (r * r / 4.0) ** (nu / 2.0) / math.gamma((nu + 1.0) / 2.0)


def wedge_moment(theta: float, r: float, p: float) -> float:
    """``E[T^p]`` for the wedge started at ``r`` on its axis (finite for ``p < pi/(4 theta)``).

    Layer-cake integral of :func:`wedge_survival` in ``log t``, with the
    leading power-law term used beyond ``t = 1e12 r^2``.
    """
    _positive(r=r, p=p)
    H = math.pi / (4.0 * theta)
    if p >= H:
        return math.inf
    t0 = r * r / 800.0
    t1 = r * r * 1e12
    head = t0 ** p
    body = _quad(lambda s: p * math.exp(p * s) * wedge_survival(theta, r, math.exp(s)),
                 math.log(t0), math.log(t1))
    tail = p * _wedge_tail_constant(theta, r) * t1 ** (p - H) / (H - p)
    return head + body + tail


def slit_moment(alpha: float, p: float) -> float:
    """``E[T^p]`` for the plane minus ``(-inf, -alpha]`` started at 0 (``p < 1/4``)."""
    return wedge_moment(math.pi, alpha, p)
