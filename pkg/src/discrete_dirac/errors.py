"""Exception hierarchy shared by all modules."""


class DiracError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(DiracError, ValueError):
    """Array widths do not match the chart or each other."""


class DomainError(DiracError, ValueError):
    """A point lies outside the domain of a map (e.g. a retraction inverse)."""


class LayoutError(DiracError, ValueError):
    """Block layout of a product space is inconsistent."""


class ConfigurationError(DiracError, ValueError):
    """Objects were combined with incompatible settings."""


class UnsupportedError(DiracError, NotImplementedError):
    """The requested operation is not available for this kind of model."""


class NumericalError(DiracError, ArithmeticError):
    """A numerical sub-problem (least squares, feasibility) failed."""


class StepError(DiracError, RuntimeError):
    """A time step could not be completed.

    ``residual`` holds the last residual norm reached by the solver.
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class ConvergenceError(StepError):
    """Newton iteration did not reach tolerance."""


class RankError(StepError):
    """The step Jacobian is singular.

    ``coordinates`` and ``constraint_rows`` name the directions spanned by the
    near-null space of the KKT matrix.
    """

    def __init__(self, message, coordinates=(), constraint_rows=(), null_vector=None):
        super().__init__(message)
        self.coordinates = tuple(coordinates)
        self.constraint_rows = tuple(constraint_rows)
        self.null_vector = null_vector


class SimulationError(DiracError, RuntimeError):
    """Raised by ``simulate`` when a step fails; carries the partial trajectory."""

    def __init__(self, message, trajectory, cause):
        super().__init__(message)
        self.trajectory = trajectory
        self.cause = cause
