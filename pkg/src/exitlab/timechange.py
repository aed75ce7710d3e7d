"""Conformal time change of Brownian motion in the unit disk.

For a univalent ``f`` on the unit disk, ``nu(f) = int_0^{T} |f'(Z_t)|^2 dt``
(``T`` the disk exit time) is distributed as the exit time of ``f(D)``.  The
kernel simulates ``Z`` in the disk and accumulates the integral with a
midpoint rule.  Steps are also limited so that one step adds at most ``h0``
of image time and ``|f'|^2`` varies by a relative ``kappa`` at most.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
import math
from pathlib import Path
from typing import Callable

import numpy as np

from . import _core
from .errors import InvalidParameter, MaxStepsExceeded
from .estimators import empirical_tail, TailCurve
from .geometry import Disk, DomainSpec, SlitPlane, encode
from .rng import StreamId
from .sampler import ExitBatch, StepConfig, _run, batch

NU_COLUMNS = ("path_id", "nu", "disk_exit_time", "steps", "refined")


@dataclass(frozen=True)
class MapEntry:
    id: str
    evaluate: Callable[[complex], complex]
    derivative: Callable[[complex], complex]
    image: DomainSpec
    schlicht: bool
    phi: float = 0.0
    kernel_id: int = _core.MAP_IDENTITY


def _koebe(z):
    return z / (1 - z) ** 2


def _koebe_prime(z):
    return (1 + z) / (1 - z) ** 3


def _wrap(a: float) -> float:
    """Angle reduced to ``(-pi, pi]``."""
    a = math.remainder(a, 2 * math.pi)
    return math.pi if a == -math.pi else a


def get_map(map_id: str, phi: float = 0.0) -> MapEntry:
    """Catalog lookup.

    ``"identity"`` is ``z``; ``"koebe"`` is ``e^{-i phi} k(e^{i phi} z)`` with
    ``k(z) = z / (1 - z)^2``, whose image is the plane minus the ray from
    ``1/4`` outward at angle ``pi - phi``.
    """
    if map_id == "identity":
        return MapEntry("identity", lambda z: complex(z), lambda z: 1.0 + 0j, Disk(1.0),
                        True, 0.0, _core.MAP_IDENTITY)
    if map_id == "koebe":
        rot = complex(math.cos(phi), math.sin(phi))
        return MapEntry("koebe",
                        lambda z: _koebe(rot * complex(z)) / rot,
                        lambda z: _koebe_prime(rot * complex(z)),
                        SlitPlane(0.25, _wrap(math.pi - phi)), True, float(phi),
                        _core.MAP_KOEBE)
    raise InvalidParameter(f"unknown map {map_id!r}; choose 'identity' or 'koebe'")


MAP_IDS = ("identity", "koebe")


@dataclass(frozen=True)
class TimeChangeRecord:
    nu: float
    disk_exit_time: float
    steps: int
    refined: bool
    status: int = _core.EXITED


def nu_sample(fmap: MapEntry, cfg: StepConfig, stream: StreamId) -> TimeChangeRecord:
    """One sample of ``nu(f)``; ``cfg.t_max`` censors in image time."""
    if not fmap.schlicht:
        raise InvalidParameter(f"map {fmap.id} is not normalized")
    kind, par = encode(Disk(1.0))
    t, nu, ex, ey, steps, _, refined, status = _core.run_path(
        kind, par, 0.0, 0.0, cfg.h0, cfg.lam, cfg.h_min, cfg.max_steps, cfg.t_max,
        fmap.kernel_id, math.cos(fmap.phi), math.sin(fmap.phi), cfg.kappa,
        np.uint64(stream.seed), np.uint64(stream.path_id))
    if status == _core.MAXSTEPS:
        raise MaxStepsExceeded(steps, t, complex(ex, ey))
    return TimeChangeRecord(nu, t, steps, refined, status)


def nu_batch(fmap: MapEntry, cfg: StepConfig, seed: int, n: int, workers: int = 1) -> ExitBatch:
    """``n`` samples of ``nu(f)``; disk exit times in ``exit_time``, image times in ``nu``."""
    if not fmap.schlicht:
        raise InvalidParameter(f"map {fmap.id} is not normalized")
    kind, par = encode(Disk(1.0))
    return _run(kind, par, 0j, cfg, seed, n, workers, fmap.kernel_id, fmap.phi)


def nu_values(b: ExitBatch) -> np.ndarray:
    """Image times usable in estimates (failed paths dropped, censored as ``inf``)."""
    return b.nu[b.status != _core.MAXSTEPS]


def write_nu_csv(b: ExitBatch, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(NU_COLUMNS)
        for i in range(len(b)):
            w.writerow((i, repr(float(b.nu[i])), repr(float(b.exit_time[i])),
                        int(b.steps[i]), int((b.flags[i] >> 1) & 1)))
    return path


@dataclass(frozen=True)
class InvarianceReport:
    map_id: str
    t_grid: np.ndarray
    nu_tail: TailCurve
    direct_tail: TailCurve
    discrepancy: np.ndarray  # per grid point, in joint standard errors

    @property
    def max_discrepancy(self) -> float:
        return float(np.max(np.abs(self.discrepancy)))

    def passed(self, k: float = 3.0) -> bool:
        return self.max_discrepancy <= k


def joint_z(a: TailCurve, b: TailCurve) -> np.ndarray:
    """Survival difference in units of the joint binomial standard error."""
    se = np.sqrt(a.se ** 2 + b.se ** 2)
    d = a.survival - b.survival
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(se > 0, d / se, np.where(d == 0, 0.0, np.inf))


def invariance_check(fmap: MapEntry, cfg: StepConfig, seed: int, n: int, t_grid,
                     workers: int = 1, direct_cfg: StepConfig | None = None) -> InvarianceReport:
    """Compare the tail of ``nu(f)`` with direct exits from ``f(D)``.

    Both runs use ``seed``; for the identity map the two sample sets coincide.
    """
    b_nu = nu_batch(fmap, cfg, seed, n, workers)
    b_dir = batch(fmap.image, 0j, direct_cfg or cfg, seed, n, workers)
    tn = empirical_tail(nu_values(b_nu), t_grid)
    td = empirical_tail(b_dir.times(), t_grid)
    return InvarianceReport(fmap.id, tn.t_grid, tn, td, joint_z(tn, td))
