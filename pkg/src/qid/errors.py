"""Exception and warning classes raised by the qid package."""


class QIDError(ValueError):
    """Base class for all qid errors."""


class NotSymmetric(QIDError):
    pass


class NotPSD(QIDError):
    """Gaussian covariance with a negative eigenvalue; no QID law has it."""


class QuadratureFailure(QIDError):
    pass


class ModeMismatch(QIDError):
    pass


class UnsupportedStableImage(QIDError):
    pass


class NotIntegrable(QIDError):
    def __init__(self, which, message=None):
        self.which = which
        super().__init__(message or f"integral over {which} diverges")


class StableUnsupported(QIDError):
    pass


class NotApplicable(QIDError):
    pass


class LambdaOutOfRange(QIDError):
    pass


class HypothesisFails(QIDError):
    def __init__(self, which, message=None):
        self.which = which
        super().__init__(message or f"moment hypothesis fails: {which}")


class GridTooCoarse(QIDError):
    pass


class ImaginaryLeak(QIDError):
    pass


class Inconclusive(QIDError):
    """Zero-freeness could be neither certified nor refuted at this grid size."""

    def __init__(self, message, min_modulus=None, threshold=None):
        self.min_modulus = min_modulus
        self.threshold = threshold
        super().__init__(message)


class ZeroFound(QIDError):
    """The characteristic function has a zero, so the law is not QID."""

    def __init__(self, message, location=None):
        self.location = location
        super().__init__(message)


class AliasWarning(UserWarning):
    pass


class TailBoundWarning(UserWarning):
    pass
