"""Exception hierarchy shared by every module of the package."""


class ReciprocError(Exception):
    """Base class for all library errors."""


class NonPrime(ReciprocError):
    pass


class UnsupportedEvenPrime(ReciprocError):
    pass


class PrecisionExhausted(ReciprocError):
    pass


class DivisionByZeroDivisor(ReciprocError):
    pass


class ZeroResidue(ReciprocError):
    pass


class WindowOverflow(ReciprocError):
    pass


class NotAUnit(ReciprocError):
    pass


class DivergentSubstitution(ReciprocError):
    pass


class InsufficientPrecision(ReciprocError):
    pass


class ConstructionMismatch(ReciprocError):
    pass


class UniformizerMismatch(ReciprocError):
    pass


class NotPrincipalUnit(ReciprocError):
    pass


class TwistSolveFailure(ReciprocError):
    pass


class NotEisenstein(ReciprocError):
    pass


class DegreeCapTooSmall(ReciprocError):
    pass


class IndistinguishableFromZero(ReciprocError):
    pass


class LevelOrder(ReciprocError):
    pass


class NonUnitResidue(ReciprocError):
    pass


class NotATorsionPoint(ReciprocError):
    pass


class NotDecomposable(ReciprocError):
    pass


class OutsideConvergenceDomain(ReciprocError):
    pass


class DomainViolation(ReciprocError):
    pass


class DescentLevelTooSmall(ReciprocError):
    pass


class NotAdmissiblePair(ReciprocError):
    pass


class OracleInapplicable(ReciprocError):
    pass


class ConfigInvalid(ReciprocError):
    pass
