"""Exception hierarchy shared by the solvers and the CLI."""


class InfoDesignError(Exception):
    """Base class for all package errors."""


class InfeasiblePrior(InfoDesignError):
    """The prior is not a convex combination of the candidate posteriors."""


class InfeasibleProblem(InfoDesignError):
    """No achievable value vector satisfies the constraint set."""


class NumericalRankFailure(InfoDesignError):
    """Affine dependence could not be detected at the working tolerance."""


class NotInSet(InfoDesignError):
    """A point lies outside the (approximated) possibility set."""


class Indeterminate(InfoDesignError):
    """Membership cannot be decided: the sandwich gap at the point is too wide."""


class MaxIterations(InfoDesignError):
    """An iterative method hit its iteration cap.

    The best iterate found so far is attached as ``best`` together with the
    last measured ``residual``.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class NonConvergence(MaxIterations):
    """A fixed-point iteration failed to settle."""


class NoRoot(InfoDesignError):
    """A bracketed root search found no sign change."""


class Unpersuadable(InfeasibleProblem):
    """No posterior makes enough voters both participate and vote."""


class SchemaError(InfoDesignError, ValueError):
    """Input document does not match the expected schema."""
