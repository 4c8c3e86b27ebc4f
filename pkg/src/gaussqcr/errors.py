"""Exception hierarchy shared by all modules."""


class QCRError(Exception):
    """Base class for every error raised by gaussqcr."""


class InvalidVariance(QCRError, ValueError):
    pass


class NotUnitary(QCRError, ValueError):
    pass


class DimensionError(QCRError, ValueError):
    pass


class InvalidState(QCRError, ValueError):
    """Covariance is not symmetric, not positive definite or not finite."""


class GridError(QCRError, ValueError):
    pass


class ResolutionError(QCRError, ValueError):
    pass


class ZeroMeanField(QCRError, ValueError):
    pass


class ZeroDetectionMode(QCRError, ValueError):
    """The mean field does not move with theta, so no detection mode exists."""


class BasisDeficient(QCRError, ValueError):
    pass


class DomainError(QCRError, ValueError):
    pass


class CovarianceError(QCRError, ValueError):
    pass


class InvalidPhotonNumber(QCRError, ValueError):
    pass


class NoInformation(QCRError, ValueError):
    """Total Fisher information vanishes: theta is not identifiable at first order."""


class PurityError(QCRError, ValueError):
    pass


class UnsupportedDimension(QCRError, ValueError):
    pass


class CoverageError(QCRError, ValueError):
    pass


class StepTooLarge(QCRError, ValueError):
    pass


class PassiveRequired(QCRError, ValueError):
    pass


class ConfigError(QCRError, ValueError):
    pass
