"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad key, bad value, bad unit, or violated precondition."""


class NumericalBlowupError(RuntimeError):
    """Non-finite amplitudes encountered during propagation.

    Carries the step index at which the blowup was detected (or None when
    raised outside a stepping loop).
    """

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConvergenceError(RuntimeError):
    """Imaginary-time relaxation failed to converge within the iteration cap."""


class PartialScanError(RuntimeError):
    """One or more scan points failed; the surviving points were written."""

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)
