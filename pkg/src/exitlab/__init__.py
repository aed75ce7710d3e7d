"""Monte Carlo exit times of planar Brownian motion.

Domains live in :mod:`exitlab.geometry`, the adaptive Euler sampler in
:mod:`exitlab.sampler`, closed-form references in :mod:`exitlab.oracles`,
tail and moment estimates in :mod:`exitlab.estimators` and the conformal
time change in :mod:`exitlab.timechange`.
"""

from .errors import ExitLabError
from .geometry import Disk, HalfPlane, MappedDisk, SlitPlane, StarLikeTest, Wedge
from .rng import StreamId
from .sampler import StepConfig, batch, simulate_exit

__all__ = ["ExitLabError", "Disk", "HalfPlane", "MappedDisk", "SlitPlane", "StarLikeTest",
           "Wedge", "StreamId", "StepConfig", "batch", "simulate_exit"]

__version__ = "0.1.0"
