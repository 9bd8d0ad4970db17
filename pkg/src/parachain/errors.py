"""Exception hierarchy shared by all parachain modules."""


class ParachainError(Exception):
    """Base class for all library errors."""


class ConfigError(ParachainError, ValueError):
    """Invalid parameters or configuration."""


class UnstableSystemError(ParachainError):
    """A steady state was requested for a system without one.

    ``margin`` is the largest imaginary part of the dynamical-matrix spectrum.
    """

    def __init__(self, message, margin=None):
        super().__init__(message)
        self.margin = margin


class SingularProbeError(ParachainError):
    """The probe frequency sits on a quasi-zero singular value of w - H."""

    def __init__(self, message, smallest_singular_value=None):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class GaplessPointError(ParachainError):
    """det(w - H(k)) vanishes on the Brillouin zone: the winding is undefined."""

    def __init__(self, message, k=None, min_abs_det=None):
        super().__init__(message)
        self.k = k
        self.min_abs_det = min_abs_det


class NumericalError(ParachainError):
    """Integration or convergence failure."""


class ConsistencyError(ParachainError):
    """An internal invariant failed numerically."""
