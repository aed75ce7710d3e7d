"""Exception types raised across the package."""


class ExitLabError(Exception):
    pass


class InvalidParameter(ExitLabError, ValueError):
    pass


class PointOutsideDomain(InvalidParameter):
    pass


class UnsupportedVariant(ExitLabError, TypeError):
    pass


class NonpositiveVariance(InvalidParameter):
    pass


class QuadratureFailure(ExitLabError, ArithmeticError):
    pass


class MaxStepsExceeded(ExitLabError, RuntimeError):
    """Raised by single-path simulation when the step budget runs out.

    Carries the partial state so callers can inspect how far the path got.
    """

    def __init__(self, steps: int, time: float, point: complex):
        super().__init__(f"no exit after {steps} steps (t={time:.6g}, z={point})")
        self.steps = steps
        self.time = time
        self.point = point


class EmptySample(InvalidParameter):
    pass


class UnsortedGrid(InvalidParameter):
    pass


class InsufficientCoverage(InvalidParameter):
    pass


class ZeroSurvival(InvalidParameter):
    pass


class GridMismatch(InvalidParameter):
    pass


class DegenerateDenominator(InvalidParameter):
    pass


class InsufficientSamples(ExitLabError, RuntimeError):
    pass


class SchemaMismatch(InvalidParameter):
    pass
