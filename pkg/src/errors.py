"""Exception hierarchy for qrw-cocycles."""


class QWCError(Exception):
    """Base class for all errors raised by this package."""


class MatrixError(QWCError, ValueError):
    """Non-square or non-finite input, or a matrix function that cannot be evaluated."""


class DimensionError(QWCError, ValueError):
    """Block or vector dimensions do not agree."""


class StructureError(QWCError, ValueError):
    """An operator violates a structural precondition (isometry, unitarity, ...)."""


class DilationRequiredError(StructureError):
    """Generator lies outside the F_{Z,L,W} class and needs an external dilation."""


class ToyFockCapError(QWCError):
    """Toy Fock space dimension exceeds the configured cap."""


class ConfigError(QWCError):
    """Scenario document is invalid.

    Args:
        message: What is wrong.
        path: Dotted key path of the offending entry, if known.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
