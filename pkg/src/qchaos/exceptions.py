class DegenerateMeasurement(ArithmeticError):
    """The conditioning measurement outcome has (numerically) zero probability."""


class SingularRotation(ValueError):
    """x = pi/2 mod pi: p = tan(x) exp(i phi) is not a finite parameter."""


class NoCycleFound(RuntimeError):
    """Neither critical orbit settled on an attracting cycle."""


class InvalidDensityMatrix(ValueError):
    """A matrix failed one or more density-matrix invariants.

    ``failures`` lists the names of the violated invariants.
    """

    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)
