"""Exception types raised across the package."""


class RenyiReachError(ValueError):
    """Base class for all domain errors."""


class NotHermitian(RenyiReachError):
    pass


class TraceNotOne(RenyiReachError):
    pass


class NotPositive(RenyiReachError):
    pass


class NotUnitary(RenyiReachError):
    pass


class DimensionMismatch(RenyiReachError):
    pass


class ConvergenceFailure(RenyiReachError):
    pass


class InvalidSpectrum(RenyiReachError):
    pass


class InvalidPovm(RenyiReachError):
    pass


class SingularNormalizer(RenyiReachError):
    pass


class AlphaOutOfDomain(RenyiReachError):
    pass


class OutcomeMismatch(RenyiReachError):
    pass


class DegenerateVariance(RenyiReachError):
    pass


class PreconditionViolated(RenyiReachError):
    pass


class ZeroMeanShift(RenyiReachError):
    pass


class GridTooCoarse(RenyiReachError):
    pass


class AllZeroLikelihood(RenyiReachError):
    pass


class BudgetExhausted(RenyiReachError):
    pass


class ConfigError(RenyiReachError):
    """Invalid campaign or CLI configuration."""
