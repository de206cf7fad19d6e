"""Named error types raised across the package."""


class SosMechError(Exception):
    """Base class for every error this package raises on purpose."""


class InvalidProfile(SosMechError, IndexError):
    pass


class GridMisaligned(SosMechError, ValueError):
    pass


class InvalidValuation(SosMechError, ValueError):
    """A table breaks monotonicity, strictness or non-negativity."""


class InvalidInstance(SosMechError, ValueError):
    pass


class CapExceeded(SosMechError, ValueError):
    pass


class NotSeparable(SosMechError, ValueError):
    pass


class KNotPowerOfTwo(SosMechError, ValueError):
    pass


class InvalidParams(SosMechError, ValueError):
    pass


class GenerationFailed(SosMechError, RuntimeError):
    pass


class NegativeCycle(SosMechError, ValueError):
    def __init__(self, message, cycle=None, weight=None):
        super().__init__(message)
        self.cycle = cycle
        self.weight = weight
