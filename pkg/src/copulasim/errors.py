"""Exception types raised across copulasim."""


class CopulaSimError(Exception):
    """Base class for all copulasim errors."""


class UnsupportedFormat(CopulaSimError):
    pass


class CorruptData(CopulaSimError):
    pass


class InvalidImage(CopulaSimError, ValueError):
    pass


class DimensionMismatch(CopulaSimError, ValueError):
    pass


class PatchTooLarge(CopulaSimError, ValueError):
    pass


class InvalidPatchSize(CopulaSimError, ValueError):
    pass


class EmptyInput(CopulaSimError, ValueError):
    pass


class DomainError(CopulaSimError, ValueError):
    pass


class LengthMismatch(CopulaSimError, ValueError):
    pass


class DegenerateWeight(CopulaSimError, ArithmeticError):
    pass


class InvalidKernel(CopulaSimError, ValueError):
    pass


class RectOutOfBounds(CopulaSimError, ValueError):
    pass


class EmptySequence(CopulaSimError, ValueError):
    pass


class LayoutNotRecognized(CopulaSimError):
    pass


class EmptyRecords(CopulaSimError, ValueError):
    pass


class InsufficientData(CopulaSimError, ValueError):
    pass
