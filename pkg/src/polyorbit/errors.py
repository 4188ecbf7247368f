"""Exception hierarchy for polyorbit.

All errors raised by the library derive from :class:`PolyorbitError` so
callers can catch the whole family at once.  Analytic preconditions get
their own classes because tests and the CLI dispatch on them.
"""


class PolyorbitError(Exception):
    """Base class for all polyorbit errors."""


class ExponentBudgetExceeded(PolyorbitError):
    """An integer exponent exceeded the configured 2**budget ceiling."""


class ZeroRoot(PolyorbitError):
    """Root of zero requested without the explicit zero convention."""


class WrongSpace(PolyorbitError):
    """Operation applied to a vector of an unsupported host space."""


class SpaceMismatch(PolyorbitError):
    """Polynomial and vector live on different host spaces."""


class TailNotRepresentable(PolyorbitError):
    """A shifted tail admits no closed form within the error budget."""


class NotInDomain(PolyorbitError):
    """Vector lies outside the domain of a (weighted) shift power."""


class NoClosedForm(PolyorbitError):
    """No analytic operator norm is known for this family."""


class IncomparableTails(PolyorbitError):
    """Neither tail eventually dominates the other coordinatewise."""


class InequalityFails(PolyorbitError):
    """A certificate inequality failed; carries the violating index."""

    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class ShapeMismatch(PolyorbitError):
    """Vector does not have the head/tail shape a certificate needs."""


class CoefficientTooSmall(PolyorbitError):
    """Orbit coefficient has modulus <= 1; periodic series diverges."""


class ZeroCoefficient(PolyorbitError):
    """Orbit coefficient vanished; the correction term is undefined."""


class NotInShiftDomain(PolyorbitError):
    """Target vector is not in the domain of the weighted forward shift."""


class GammaTooLarge(PolyorbitError):
    """Scalar gamma violates epsilon/(r*|gamma|) > 1."""


class GammaGrowthInsufficient(PolyorbitError):
    """No tail of the scalar set grows fast enough for the correction."""


class ScheduleSearchExhausted(PolyorbitError):
    """Greedy schedule search ran out of budget for some index."""


class BudgetExhausted(PolyorbitError):
    """An iteration budget ran out before the goal was met."""


class NoKernelVector(PolyorbitError):
    """No coordinate outside all functional supports was available."""


class ZeroLambda(PolyorbitError):
    """Scaling by zero is not a conjugacy."""


class DependentFamily(PolyorbitError):
    """Biorthogonalization hit a pivot below tolerance."""


class ConfigError(PolyorbitError):
    """Experiment configuration is malformed or references unknowns."""
