"""Exception types raised across the package."""


class DqFormError(ValueError):
    """Base class for all precondition failures in dqform."""


class NonUnitAttitude(DqFormError):
    pass


class NonUnitInput(DqFormError):
    pass


class TooSmall(DqFormError):
    pass


class SizeMismatch(DqFormError):
    pass


class NegativeSigma(DqFormError):
    pass


class NonSquare(DqFormError):
    pass


class NoConvergence(DqFormError):
    pass


class NotSimpleZero(DqFormError):
    pass


class ShapeMismatch(DqFormError):
    pass


class NoSpanningTree(DqFormError):
    pass


class MissingLimit(DqFormError):
    pass


class RankDeficient(DqFormError):
    pass
