"""Catalog of simply connected planar domains.

Points are plain Python ``complex`` numbers.  Each domain variant is a frozen
dataclass; the module-level functions (``contains``, ``boundary_distance``,
``nearest_boundary`` ...) dispatch on the variant and share the compiled
geometry in :mod:`exitlab._core` with the samplers, so the Monte Carlo kernels
and the Python API can never disagree about a domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math
from typing import Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import _core
from .errors import PointOutsideDomain, UnsupportedVariant, InvalidParameter

GEOM_TOL = _core.GEOM_TOL

ComplexPoint = complex


@dataclass(frozen=True)
class Disk:
    r: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise InvalidParameter("disk radius must be positive")


@dataclass(frozen=True)
class HalfPlane:
    """``{z : Re(z e^{-i phi}) < alpha}``; ``phi = 0`` is ``{Re z < alpha}``."""

    alpha: float
    phi: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidParameter("half-plane offset must be positive")


@dataclass(frozen=True)
class SlitPlane:
    """Plane minus the closed ray ``{s e^{i psi} : s >= alpha}``.

    ``psi = pi`` removes ``(-inf, -alpha]``.
    """

    alpha: float
    psi: float = math.pi

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidParameter("slit distance must be positive")


@dataclass(frozen=True)
class Wedge:
    """``{z != 0 : |arg(z e^{-i axis})| < theta}``, vertex at the origin."""

    theta: float
    axis: float = 0.0

    def __post_init__(self):
        if not 0 < self.theta < math.pi:
            raise InvalidParameter("wedge half-angle must lie in (0, pi)")

    def axis_point(self, r: float = 1.0) -> complex:
        return r * complex(math.cos(self.axis), math.sin(self.axis))


@dataclass(frozen=True)
class StarLikeTest:
    """Bounded radial graph ``|z| < rho(arg z)`` with a trigonometric ``rho``.

    ``rho(t) = a_0 + sum_k a_k cos(k t) + b_k sin(k t)`` with
    ``cos_coeffs = (a_0, ..., a_K)`` and ``sin_coeffs = (b_1, ..., b_K)``.
    """

    cos_coeffs: tuple
    sin_coeffs: tuple = ()
    name: str = ""
    table_size: int = field(default=256, compare=False)

    def __post_init__(self):
        K = len(self.cos_coeffs) - 1
        if K < 0:
            raise InvalidParameter("need at least the constant coefficient")
        if len(self.sin_coeffs) not in (0, K):
            raise InvalidParameter("sin_coeffs must be empty or have K entries")
        if not self.rho_min > 0:
            raise InvalidParameter("radial function must stay positive")

    @property
    def degree(self) -> int:
        return len(self.cos_coeffs) - 1

    def _b(self):
        return tuple(self.sin_coeffs) or (0.0,) * self.degree

    def rho(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full(theta.shape, float(self.cos_coeffs[0]))
        for k, (a, b) in enumerate(zip(self.cos_coeffs[1:], self._b()), start=1):
            out = out + a * np.cos(k * theta) + b * np.sin(k * theta)
        return out

    @cached_property
    def _extrema(self):
        grid = np.linspace(0.0, 2 * math.pi, 4097)
        vals = self.rho(grid)
        out = []
        for sign in (1.0, -1.0):
            j = int(np.argmin(sign * vals))
            res = minimize_scalar(lambda t: sign * float(self.rho(t)),
                                  bounds=(grid[max(j - 1, 0)], grid[min(j + 1, 4096)]),
                                  method="bounded", options={"xatol": 1e-13})
            out.append(min(sign * vals[j], res.fun) * sign)
        return tuple(out)

    @property
    def rho_min(self) -> float:
        return self._extrema[0]

    @property
    def rho_max(self) -> float:
        return self._extrema[1]


@dataclass(frozen=True)
class MappedDisk:
    """Image of the unit disk under a catalog map (see :mod:`exitlab.timechange`)."""

    map_id: str
    phi: float = 0.0

    @property
    def image(self):
        from .timechange import get_map

        return get_map(self.map_id, self.phi).image


DomainSpec = Union[Disk, HalfPlane, SlitPlane, Wedge, StarLikeTest, MappedDisk]

# d(V) = 1/2 for every member; ``rho`` attains its minimum at arg z = pi
STAR_TESTS = {
    "limacon": StarLikeTest((1.0, 0.5), name="limacon"),
    "long_limacon": StarLikeTest((1.5, 1.0), name="long_limacon"),
    "trefoil": StarLikeTest((0.8, 0.0, 0.0, 0.3), name="trefoil"),
}


def star_like(name: str) -> StarLikeTest:
    try:
        return STAR_TESTS[name]
    except KeyError:
        raise InvalidParameter(f"unknown star-like test domain {name!r}; "
                               f"choose from {sorted(STAR_TESTS)}") from None


def resolve(domain: DomainSpec) -> DomainSpec:
    """Replace a mapped disk by its explicit image description."""
    while isinstance(domain, MappedDisk):
        domain = domain.image
    return domain


def encode(domain: DomainSpec) -> tuple[int, np.ndarray]:
    """Kernel encoding ``(kind, params)`` of a domain."""
    d = resolve(domain)
    if isinstance(d, Disk):
        return _core.DISK, np.array([d.r])
    if isinstance(d, HalfPlane):
        return _core.HALFPLANE, np.array([d.alpha, math.cos(d.phi), math.sin(d.phi), d.phi])
    if isinstance(d, SlitPlane):
        return _core.SLIT, np.array([d.alpha, math.cos(d.psi), math.sin(d.psi), d.psi])
    if isinstance(d, Wedge):
        return _core.WEDGE, np.array([d.theta, math.cos(d.axis), math.sin(d.axis),
                                      math.cos(d.theta), math.sin(d.theta), d.axis])
    if isinstance(d, StarLikeTest):
        K = d.degree
        M = d.table_size
        th = 2 * math.pi * np.arange(M) / M
        rho = d.rho(th)
        # inner/outer radii with a safety margin for the kernel's fast paths
        head = [K, d.rho_min - 1e-9, d.rho_max + 1e-9]
        return _core.STAR, np.concatenate([
            head, np.asarray(d.cos_coeffs, float), np.asarray(d._b(), float),
            [M], rho * np.cos(th), rho * np.sin(th)])
    raise UnsupportedVariant(f"not a catalog domain: {domain!r}")


@dataclass(frozen=True)
class BoundaryLine:
    """Local linearization of the boundary: nearest point and inward normal."""

    foot: complex
    normal_angle: float

    @property
    def normal(self) -> complex:
        return complex(math.cos(self.normal_angle), math.sin(self.normal_angle))

    def signed_distance(self, z: complex) -> float:
        dz = z - self.foot
        n = self.normal
        return dz.real * n.real + dz.imag * n.imag


def _contains_enc(kind, par, z: complex) -> bool:
    x, y = z.real, z.imag
    if not (math.isfinite(x) and math.isfinite(y)):
        return False
    if not _core.inside(kind, par, x, y):
        return False
    return _core.nearest(kind, par, x, y)[0] > GEOM_TOL


def contains(domain: DomainSpec, z: complex) -> bool:
    """True iff ``z`` is an interior point, at least ``GEOM_TOL`` from the boundary."""
    return _contains_enc(*encode(domain), complex(z))


def _require_inside(kind, par, domain, z):
    if not _contains_enc(kind, par, z):
        raise PointOutsideDomain(f"{z} is not inside {domain!r}")


def boundary_distance(domain: DomainSpec, z: complex) -> float:
    kind, par = encode(domain)
    z = complex(z)
    _require_inside(kind, par, domain, z)
    return float(_core.nearest(kind, par, z.real, z.imag)[0])


def d_origin(domain: DomainSpec) -> float:
    """Distance from the origin to the boundary."""
    d = resolve(domain)
    if isinstance(d, StarLikeTest):
        return d.rho_min
    return boundary_distance(d, 0j)


def nearest_boundary(domain: DomainSpec, z: complex) -> BoundaryLine:
    kind, par = encode(domain)
    z = complex(z)
    _require_inside(kind, par, domain, z)
    _, fx, fy, nx, ny = _core.nearest(kind, par, z.real, z.imag)
    return BoundaryLine(complex(fx, fy), math.atan2(ny + 0.0, nx))


def _star_arcs(d: StarLikeTest, r: float) -> float:
    if r < d.rho_min:
        return 2 * math.pi
    if r >= d.rho_max:
        return 0.0
    n = 4096
    grid = np.linspace(0.0, 2 * math.pi, n + 1)
    f = d.rho(grid) - r

    def g(t):
        return float(d.rho(t)) - r

    # boundary angles where rho crosses r
    roots = []
    for j in range(n):
        if f[j] == 0.0:
            roots.append(grid[j])
        elif f[j] * f[j + 1] < 0:
            roots.append(brentq(g, grid[j], grid[j + 1], xtol=1e-14))
    if not roots:
        return 2 * math.pi if f[0] > 0 else 0.0
    roots = np.array(roots)
    best = 0.0
    for j, lo in enumerate(roots):
        hi = roots[(j + 1) % len(roots)]
        span = (hi - lo) % (2 * math.pi)
        mid = lo + 0.5 * span
        if g(mid) > 0:
            best = max(best, span)
    return best


def arc_measure(domain: DomainSpec, r: float) -> float:
    """Angular measure of the largest subarc of ``domain ∩ {|z| = r}``."""
    if not r > 0:
        raise InvalidParameter("radius must be positive")
    d = resolve(domain)
    if isinstance(d, SlitPlane):
        return 2 * math.pi
    if isinstance(d, Wedge):
        return 2 * d.theta
    if isinstance(d, Disk):
        return 2 * math.pi if r < d.r else 0.0
    if isinstance(d, HalfPlane):
        return 2 * math.pi if r <= d.alpha else 2 * math.pi - 2 * math.acos(d.alpha / r)
    if isinstance(d, StarLikeTest):
        return _star_arcs(d, r)
    raise UnsupportedVariant(f"arc measure undefined for {domain!r}")


def hardy_number(domain: DomainSpec) -> float:
    """``sup{p : E[T^p] < inf}`` for exits started at the origin (``inf`` if bounded)."""
    d = resolve(domain)
    if isinstance(d, Disk):
        return math.inf
    if isinstance(d, Wedge):
        return math.pi / (4 * d.theta)
    if isinstance(d, HalfPlane):
        return 0.5
    if isinstance(d, SlitPlane):
        return 0.25
    if isinstance(d, StarLikeTest):
        limit_arc = _star_arcs(d, 2 * d.rho_max)
        return math.inf if limit_arc == 0 else math.pi / (2 * limit_arc)
    raise UnsupportedVariant(f"no Hardy number known for {domain!r}")


def default_start(domain: DomainSpec) -> complex:
    """The origin, except for wedges (axis point at unit distance)."""
    d = resolve(domain)
    if isinstance(d, Wedge):
        return d.axis_point(1.0)
    return 0j
