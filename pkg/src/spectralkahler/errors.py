"""Exception hierarchy shared by all modules."""


class SpectralKahlerError(Exception):
    """Base class for every error raised by this package."""


class CurveError(SpectralKahlerError):
    pass


class DegreeError(CurveError):
    pass


class RootSeparationError(CurveError):
    pass


class SeriesDivergenceError(CurveError):
    pass


class ContinuationAmbiguityError(SpectralKahlerError):
    pass


class RankError(SpectralKahlerError):
    pass


class CrossingDegeneracyError(SpectralKahlerError):
    pass


class QuadratureError(SpectralKahlerError):
    pass


class PoleOnPathError(SpectralKahlerError):
    pass


class IllConditionedError(SpectralKahlerError):
    pass


class ThetaTruncationError(SpectralKahlerError):
    pass


class DegenerateCharacteristicError(SpectralKahlerError):
    pass


class CorrectionRankError(SpectralKahlerError):
    pass


class ExtrapolationError(SpectralKahlerError):
    pass


class JetOrderError(SpectralKahlerError):
    pass


class NonSymmetricResultError(SpectralKahlerError):
    pass


class FrameMissingError(SpectralKahlerError):
    pass


class ModeError(SpectralKahlerError):
    pass


class FrameTransportError(SpectralKahlerError):
    pass


class NewtonDivergenceError(SpectralKahlerError):
    pass


class StepTooLargeError(SpectralKahlerError):
    pass


class ConfigError(SpectralKahlerError):
    """Invalid run configuration; ``path`` locates the offending key."""

    def __init__(self, message, path=()):
        super().__init__(message)
        self.path = tuple(path)
