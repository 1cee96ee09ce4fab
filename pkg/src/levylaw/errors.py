"""Exception hierarchy for levylaw.

Validation errors (bad inputs, unsupported classes) derive from
:class:`ValidationError`; numeric failures (tolerance not met, divergent
series) derive from :class:`NumericError`.  The CLI maps the former to exit
code 1 and the latter to exit code 2.
"""


class LevyLawError(Exception):
    """Base class for all levylaw errors."""


class ValidationError(LevyLawError):
    """Invalid input or unsupported configuration."""


class NumericError(LevyLawError):
    """A numeric routine could not meet its accuracy contract."""


# -- levy_model -------------------------------------------------------------

class OutOfStrip(ValidationError):
    """Evaluation point lies outside the analyticity strip."""


class QuadratureFailure(NumericError):
    """Adaptive quadrature did not reach the requested tolerance."""


class RootBracketFailure(NumericError):
    """A sign change could not be bracketed although a root provably exists."""


# -- wiener_hopf ------------------------------------------------------------

class UnsupportedClass(ValidationError):
    """The exponent is outside the supported Wiener-Hopf classes."""


class FactorValidationFailure(NumericError):
    """Produced factor pair fails the grid identity check."""


class NotBernstein(ValidationError):
    """A candidate factor violates Bernstein-function constraints."""


class SeriesDivergence(NumericError):
    """Potential-density series terms fail to decay within the horizon."""


# -- bernstein_gamma --------------------------------------------------------

class NearPole(NumericError):
    """Evaluation point is too close to a pole of the meromorphic extension."""

    def __init__(self, message, location=None, residue=None):
        super().__init__(message)
        self.location = location
        self.residue = residue


class ConvergenceFailure(NumericError):
    """Iterative evaluation failed to stabilise."""


class SlowConvergence(NumericError):
    """Limit iteration stalled; carries the best estimate and an error bound."""

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class Unclassifiable(ValidationError):
    """Decay class cannot be determined from the measure as given."""


class NoExplicitPotential(ValidationError):
    """Malmsten-type integral needs a closed-form potential measure."""


# -- mellin -----------------------------------------------------------------

class ZeroDenominator(ValidationError):
    """Recurrence residual requested at a zero of Psi(-z)."""


class NotInClass(ValidationError):
    """Law is outside the class required by the requested representation."""


# -- inversion --------------------------------------------------------------

class OutsideSupport(ValidationError):
    """Point lies outside the support of the law."""


class SmoothnessCapExceeded(ValidationError):
    """Derivative order exceeds the smoothness guaranteed by the decay class."""


class TruncationFailure(NumericError):
    """Contour truncation could not reach the tail tolerance."""


class NotKilled(ValidationError):
    """Small-x expansion requires a killed exponent (Psi(0) < 0)."""


class OrderExceedsPoles(ValidationError):
    """Expansion order exceeds the pole count bound of the shifted contour."""


class NoCramerRoot(ValidationError):
    """No negative root of phi_minus: Cramer condition unavailable."""


class ConditionUnverifiable(ValidationError):
    """A Cramer-condition hypothesis cannot be verified numerically."""


class MomentInfinite(ValidationError):
    """Requested negative moment is infinite for this exponent."""


# -- simulate ---------------------------------------------------------------

class NotAlmostSurelyFinite(ValidationError):
    """The perpetuity is infinite a.s. (descending factor vanishes at zero)."""


class HorizonExceeded(NumericError):
    """Path integration exceeded the maximum allowed horizon."""


class SupportMismatch(ValidationError):
    """Empirical and analytic supports do not overlap as required."""
