"""Exception types raised across the package."""


class TailNormExceeded(ArithmeticError):
    """Fock truncation left too much weight near the cutoff."""


class PhaseAlignmentFailed(ArithmeticError):
    """A finite-difference sample lost overlap with the reference state."""


class FiniteDifferenceInconsistent(ArithmeticError):
    """Derivative estimates at h and h/2 disagree."""


class SingularFisherMatrix(ArithmeticError):
    """The QFI matrix is too close to singular for Cramer-Rao bounds."""


class GammaTooSmall(ValueError):
    """Rotation angle below the range where closed coefficients are stable."""


class InvalidAxis(ValueError):
    """Axis angle outside the set supported by a closed decomposition."""


class InvalidSpin(ValueError):
    """Spin label not valid for the requested operation."""


class AxisMismatch(ValueError):
    """Two rotations were expected to share an axis."""


class RangeError(ValueError):
    """Index or grid argument out of range."""
