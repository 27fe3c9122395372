"""Exception types shared across the package."""


class PmfRiskError(Exception):
    """Base class for every error raised by this package."""


class EmptyPolytope(PmfRiskError):
    """No pmf on the grid can satisfy the mean constraint."""


class DegeneratePolytope(PmfRiskError):
    """The feasible set is a single point and has nothing to sample."""


class DimensionMismatch(PmfRiskError, ValueError):
    """Array lengths disagree with the operation's contract."""


class GridMismatch(PmfRiskError, ValueError):
    """Two objects refer to different support grids."""


class EmptyBatch(PmfRiskError, ValueError):
    """An operation that needs at least one sample received none."""


class InvalidFactors(PmfRiskError, ValueError):
    """Lattice jump factors violate 0 < d < u."""


class ArbitrageViolation(PmfRiskError):
    """The gross rate lies outside the span of the state amplitudes."""


class BracketNotFound(PmfRiskError):
    """Sign-change bracketing of the tilt equation failed."""


class ConvergenceFailure(PmfRiskError):
    """An iterative solve finished without meeting its residual target."""


class InsufficientData(PmfRiskError, ValueError):
    """Too few observations to estimate the requested moments."""


class CalibrationDegenerate(PmfRiskError):
    """Calibrated state values collapse onto each other (zero variance)."""


class ProbabilityOutOfRange(PmfRiskError):
    """Moment matching produced a probability outside [0, 1]."""
