"""Exception hierarchy shared by every module."""


class UnidymError(Exception):
    """Base class for all errors raised by unidym."""


class DomainError(UnidymError, ValueError):
    """Point or interval outside the map's domain."""


class PoleError(UnidymError, ArithmeticError):
    """Evaluation hit the pole of a Möbius or tangent node."""


class FlatnessError(UnidymError):
    """Derivative vanishes on a set without isolated zeros (or to all available orders)."""


class DegenerateConfigurationError(UnidymError, ValueError):
    """J touches the boundary of T, or an interval has zero length where positive length is required."""


class NotDiffeomorphismError(UnidymError):
    """The map has a critical point on an interval where monotonicity is required."""


class CriticalPointError(UnidymError, ArithmeticError):
    """Quantity undefined because Df vanishes at the evaluation point."""


class PreconditionError(UnidymError, ValueError):
    """Caller supplied arguments outside an operation's admissible range."""


class HypothesisError(UnidymError):
    """A lemma's hypothesis fails for the supplied configuration."""


class NumericError(UnidymError, ArithmeticError):
    """Root bracketing, integration or convergence failure."""


class ContinuumError(UnidymError):
    """Periodic points are not isolated (e.g. the identity map)."""


class InvariantError(UnidymError, AssertionError):
    """An internal invariant was breached; indicates a bug, not bad input."""
