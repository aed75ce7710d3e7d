"""Counter-based random numbers (Philox4x64-10).

Every draw is a pure function of ``(seed, path_id, step, purpose)``, so a path's
noise does not depend on which worker simulates it or in what order.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from numba import njit

_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S12 = np.uint64(12)
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_INV52 = 1.0 / 4503599627370496.0
TWO_PI = 2.0 * math.pi

# counter word 1 selects the purpose of a block
PURPOSE_STEP = 0
PURPOSE_EXACT = 1


@dataclass(frozen=True)
class StreamId:
    seed: int
    path_id: int

    def __post_init__(self):
        for name in ("seed", "path_id"):
            v = getattr(self, name)
            if not 0 <= v < 2**64:
                raise ValueError(f"{name} must fit in 64 unsigned bits, got {v}")


@njit(cache=True, inline="always")
def _mulhilo(a, b):
    a_lo = a & _MASK32
    a_hi = a >> _S32
    b_lo = b & _MASK32
    b_hi = b >> _S32
    ll = a_lo * b_lo
    hl = a_hi * b_lo
    lh = a_lo * b_hi
    hh = a_hi * b_hi
    cross = (ll >> _S32) + (hl & _MASK32) + lh
    hi = hh + (hl >> _S32) + (cross >> _S32)
    return hi, a * b


@njit(cache=True)
def philox4x64(c0, c1, c2, c3, k0, k1):
    """Ten-round Philox4x64 block; all arguments and results are uint64."""
    for r in range(10):
        if r > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@njit(cache=True, inline="always")
def to_unit(x):
    """Map 64 random bits to a double strictly inside (0, 1).

    52 bits keep the top value ``1 - 2^-53`` representable.
    """
    return (float(x >> _S12) + 0.5) * _INV52


@njit(cache=True)
def step_block(seed, path_id, step, purpose):
    """Two standard normals and two uniforms for one step of one path."""
    r0, r1, r2, r3 = philox4x64(np.uint64(step), np.uint64(purpose),
                                np.uint64(path_id), np.uint64(0),
                                np.uint64(seed), np.uint64(0))
    rad = math.sqrt(-2.0 * math.log(to_unit(r0)))
    ang = TWO_PI * to_unit(r1)
    return rad * math.cos(ang), rad * math.sin(ang), to_unit(r2), to_unit(r3)


def normals(stream: StreamId, n_steps: int) -> np.ndarray:
    """The first ``n_steps`` Gaussian increment pairs a path would consume."""
    out = np.empty((n_steps, 2))
    for k in range(n_steps):
        g1, g2, _, _ = step_block(stream.seed, stream.path_id, k, PURPOSE_STEP)
        out[k] = g1, g2
    return out
