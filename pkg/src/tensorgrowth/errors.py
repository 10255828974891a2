"""Exception hierarchy shared by every module of :mod:`tensorgrowth`."""


class GrowthError(Exception):
    """Base class for all errors raised by this package."""

    #: short machine-readable tag, used by the CLI error JSON
    code = "growth-error"


class PresentationError(GrowthError, ValueError):
    """A presentation (family spec, matrix, JSON file) is malformed."""

    code = "presentation"


class InvalidKeyError(GrowthError, KeyError):
    """A vertex key does not encode a basis element of the family."""

    code = "invalid-key"

    def __str__(self):
        # KeyError quotes its argument; keep the message readable
        return str(self.args[0]) if self.args else ""


class ExpansionCapError(GrowthError):
    """Lazy expansion would exceed the configured vertex cap."""

    code = "expansion-cap"

    def __init__(self, message, discovered=None, cap=None):
        super().__init__(message)
        self.discovered = discovered
        self.cap = cap


class ScheduleError(GrowthError, ValueError):
    """An explicit filtration schedule is not nested or misses the unit."""

    code = "schedule"


class ConvergenceError(GrowthError):
    """An iterative method did not converge within its iteration budget."""

    code = "convergence"


class AcyclicClassError(GrowthError):
    """A strongly connected class has no closed walk, so no period."""

    code = "acyclic-class"


class NormalizationError(GrowthError):
    """Left and right eigenvectors are (numerically) orthogonal."""

    code = "normalization"


class SizeCapError(GrowthError):
    """A dense computation was requested on a matrix above the dense cap."""

    code = "size-cap"


class ZeroSeriesError(GrowthError):
    """A return series vanishes identically, the vertex is on no cycle."""

    code = "zero-series"


class NoFinalBasicClassError(GrowthError):
    """No unique, stable, finite final basic class could be detected."""

    code = "no-fbc"


class NotStabilizedError(GrowthError):
    """Cutoff coefficients did not settle within the depth schedule."""

    code = "not-stabilized"


class ImaginaryResidueError(GrowthError):
    """An asymptotic model evaluated to a visibly non-real number."""

    code = "imaginary-residue"
