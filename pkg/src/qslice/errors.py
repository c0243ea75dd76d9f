"""Exception types raised by the computational modules."""


class QSliceError(Exception):
    """Base class for all library errors."""


class ZeroVector(QSliceError):
    """Input vector has zero Euclidean norm."""


class NonFinite(QSliceError):
    """Input contains NaN or infinite entries."""


class AllZero(QSliceError):
    """Every coordinate of a direction is zero."""


class DimensionTooLarge(QSliceError):
    """Exact enumeration/inclusion-exclusion refused above its size cap."""


class IllConditioned(QSliceError):
    """Alternating sum cancellation exceeds the trusted threshold."""


class TailNotBounded(QSliceError):
    """Oscillatory tail cannot be certified at the requested tolerance.

    Callers should fall back to the geometric evaluator.
    """


class NonConvergent(QSliceError):
    """Certified error bound exceeds the requested tolerance."""


class DomainError(QSliceError):
    """Argument outside the domain an operation supports."""


class BracketFailure(QSliceError):
    """Root bracketing or a bracket-implied bound failed."""


class EpsilonOutOfRange(QSliceError):
    """Stability parameter outside the admissible open interval."""


class CoefficientOverflow(QSliceError):
    """Binomial closed form refused; use quadrature instead."""


class DegreeOverflow(QSliceError):
    """Piecewise-polynomial degree would exceed the configured cap."""


class ZeroScale(QSliceError):
    """Scaling a distribution by zero is not invertible."""


class EmptySet(QSliceError):
    """Interval union has zero total length."""


class NoConvergence(QSliceError):
    """No optimization restart reached the stagnation criterion."""


class SamplerStarved(QSliceError):
    """Rejection sampler failed to reach the requested count."""


class AgreementError(QSliceError):
    """Two independent evaluation routes disagree beyond tolerance."""
