"""Exception types raised across the package."""


class FairIBError(ValueError):
    """Base class for all validation and numerical errors."""


class NegativeMass(FairIBError):
    pass


class NotNormalized(FairIBError):
    pass


class EmptySupport(FairIBError):
    pass


class ConditionOnNull(FairIBError):
    pass


class LengthMismatch(FairIBError):
    pass


class BadParameter(FairIBError):
    pass


class AlphabetMismatch(FairIBError):
    pass


class DegenerateNormalizer(FairIBError, ArithmeticError):
    """The encoder normalizer vanished: every cluster is numerically dead."""


class InternalError(RuntimeError):
    """A numerical invariant was violated by more than round-off."""
