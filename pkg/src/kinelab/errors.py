"""Exception hierarchy shared by all kinelab modules."""


class KinelabError(Exception):
    """Base class for all kinelab errors."""


class RankDeficient(KinelabError):
    """Cone generators are linearly dependent."""


class DimensionMismatch(KinelabError):
    """Objects live in different ambient dimensions."""


class InvalidAnchor(KinelabError):
    """A link query was anchored to a cone with no generators."""


class NumericalFailure(KinelabError):
    """A solver failed to converge within its iteration cap."""


class DegenerateSample(KinelabError):
    """A feasibility decision fell inside the degeneracy band.

    Monte Carlo callers discard the ambient random draw and resample;
    deterministic callers let this propagate.
    """


class BudgetExceeded(KinelabError):
    """Subset enumeration exceeded the configured probe budget."""


class Unstable(KinelabError):
    """The delta ladder never produced two consecutive equal values."""


class DegeneracyBudgetExceeded(KinelabError):
    """Too large a fraction of Monte Carlo samples were degenerate."""


class SchemaError(KinelabError):
    """Scene or report JSON violates the expected schema."""


class UnsupportedScene(KinelabError):
    """A verification law was asked to run on inputs it does not cover."""
