"""Exception hierarchy shared by all modules."""


class NoncentralError(Exception):
    """Base class for errors raised by this package."""


class OutOfRange(NoncentralError, ValueError):
    pass


class LengthMismatch(NoncentralError, ValueError):
    pass


class NonPositiveArgument(NoncentralError, ValueError):
    pass


class NonPositiveInput(NonPositiveArgument):
    pass


class NonPositiveValue(NonPositiveArgument):
    pass


class NegativeDistance(NoncentralError, ValueError):
    pass


class DegenerateGrid(NoncentralError, ValueError):
    pass


class EmptyBatch(NoncentralError, ValueError):
    pass


class ConfigInvalid(NoncentralError, ValueError):
    pass


class AlphaOutOfRange(OutOfRange):
    pass


class TauTooNegative(OutOfRange):
    pass


class RankZero(NoncentralError, ValueError):
    pass


class RankUndetected(NoncentralError, ValueError):
    pass


class UnsupportedOrder(NoncentralError, ValueError):
    pass


class NonFiniteQuadrature(NoncentralError, ArithmeticError):
    pass


class QuadratureFailure(NoncentralError, ArithmeticError):
    pass


class EmbeddingNotPSD(NoncentralError, ArithmeticError):
    pass


class RadialCdfTabulationFailure(NoncentralError, ArithmeticError):
    pass


class CutoffTooSmall(NoncentralError, ValueError):
    pass


class HermitianViolation(NoncentralError, ArithmeticError):
    pass
