"""Scenarios: domain, sampler settings, seed and grid for one command.

Values come from three layers, later ones winning: built-in defaults, a flat
``key = value`` config file, and command-line flags.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
import math
import os
from pathlib import Path

import numpy as np

from ..errors import InvalidParameter
from ..estimators import geometric_grid
from ..geometry import (Disk, DomainSpec, HalfPlane, MappedDisk, SlitPlane, Wedge,
                        default_start, star_like)
from ..sampler import StepConfig

OUT_ENV = "EXITLAB_OUT"

DOMAINS = ("disk", "halfplane", "slit", "wedge", "star", "koebe")


def default_out() -> Path:
    return Path(os.environ.get(OUT_ENV, "exitlab_out"))


@dataclass(frozen=True)
class GridSpec:
    """Geometric grid ``lo:hi:n``."""

    lo: float
    hi: float
    n: int = 40

    def points(self) -> np.ndarray:
        return geometric_grid(self.lo, self.hi, self.n)

    def __str__(self):
        return f"{self.lo!r}:{self.hi!r}:{self.n}"


def parse_grid(text) -> GridSpec:
    if isinstance(text, GridSpec):
        return text
    parts = str(text).split(":")
    if len(parts) not in (2, 3):
        raise InvalidParameter(f"grid must look like lo:hi[:n], got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        n = int(parts[2]) if len(parts) == 3 else 40
    except ValueError:
        raise InvalidParameter(f"bad grid {text!r}") from None
    if not 0 < lo < hi or n < 2:
        raise InvalidParameter(f"grid needs 0 < lo < hi and n >= 2, got {text!r}")
    return GridSpec(lo, hi, n)


def parse_point(text) -> complex:
    if isinstance(text, complex):
        return text
    parts = str(text).replace(" ", "").split(",")
    if len(parts) != 2:
        raise InvalidParameter(f"start must look like x,y, got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise InvalidParameter(f"bad start point {text!r}") from None


def parse_angle(text) -> float:
    """A float, or a multiple of pi written like ``pi/4``, ``-pi`` or ``0.25pi``."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().replace(" ", "").replace("*", "")
    if "pi" not in s:
        return float(s)
    num, _, den = s.partition("/")
    head = num.replace("pi", "")
    head = {"": "1", "-": "-1", "+": "1"}.get(head, head)
    return float(head) * math.pi / (float(den) if den else 1.0)


def parse_floats(text) -> tuple:
    if isinstance(text, (tuple, list)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes in keys equal underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameter(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


@dataclass(frozen=True)
class Scenario:
    """Everything one command needs to run reproducibly."""

    name: str = "simulate"
    domain: str = "disk"
    alpha: float = 0.5
    theta: float = math.pi / 4
    psi: float | None = None
    r: float = 1.0
    axis: float | None = None
    star: str = "limacon"
    map: str = "koebe"
    phi: float = 0.0
    start: complex | None = None
    n: int = 10_000
    seed: int = 1
    h0: float = 1e-3
    lam: float = 0.5
    t_max: float = math.inf
    grid: GridSpec | None = None
    out: Path = field(default_factory=default_out)
    workers: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameter("n must be at least 1")
        if self.workers < 1:
            raise InvalidParameter("workers must be at least 1")
        if self.domain not in DOMAINS:
            raise InvalidParameter(f"unknown domain {self.domain!r}; choose from {DOMAINS}")
        self.domain_spec()  # fail early on bad parameters

    def domain_spec(self) -> DomainSpec:
        d = self.domain
        if d == "disk":
            return Disk(self.r)
        if d == "halfplane":
            return HalfPlane(self.alpha, 0.0 if self.psi is None else self.psi)
        if d == "slit":
            return SlitPlane(self.alpha, math.pi if self.psi is None else self.psi)
        if d == "wedge":
            # by default one edge lies on the positive real axis: {0 < arg z < 2 theta}
            return Wedge(self.theta, self.theta if self.axis is None else self.axis)
        if d == "star":
            return star_like(self.star)
        return MappedDisk(self.map, self.phi)

    def start_point(self) -> complex:
        if self.start is not None:
            return self.start
        return default_start(self.domain_spec())

    def step_config(self, **over) -> StepConfig:
        kw = dict(h0=self.h0, lam=self.lam, t_max=self.t_max)
        kw.update(over)
        return StepConfig(**kw)

    def t_grid(self, default=None) -> np.ndarray:
        g = self.grid or (parse_grid(default) if default is not None else None)
        if g is None:
            raise InvalidParameter("this command needs --grid lo:hi:n")
        return g.points()

    def with_(self, **kw) -> "Scenario":
        return replace(self, **kw)


_CONVERT = {
    "alpha": float, "theta": parse_angle, "psi": parse_angle, "r": float, "axis": parse_angle,
    "phi": parse_angle, "h0": float, "lam": float, "t_max": float, "n": lambda v: int(float(v)),
    "seed": int, "workers": int, "start": parse_point, "grid": parse_grid, "out": Path,
    "domain": str, "star": str, "map": str, "name": str,
}

SCENARIO_KEYS = frozenset(f.name for f in fields(Scenario))


def build_scenario(name: str, file_values: dict | None = None, flags: dict | None = None,
                   defaults: dict | None = None) -> tuple[Scenario, dict]:
    """Merge the three layers; returns the scenario and the remaining extra keys.

    ``lambda`` is accepted as an alias of ``lam``.
    """
    merged = {}
    for layer in (defaults or {}, file_values or {}, flags or {}):
        for k, v in layer.items():
            if v is None:
                continue
            k = k.replace("-", "_")
            merged["lam" if k == "lambda" else k] = v
    merged["name"] = name
    known = {}
    extra = {}
    for k, v in merged.items():
        if k in SCENARIO_KEYS:
            try:
                known[k] = _CONVERT[k](v) if isinstance(v, str) or k in ("grid", "out") else v
            except ValueError:
                raise InvalidParameter(f"bad value for {k}: {v!r}") from None
        else:
            extra[k] = v
    return Scenario(**known), extra
