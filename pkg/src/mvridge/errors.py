"""Exception hierarchy shared by all modules."""


class MVRidgeError(Exception):
    """Base class for all errors raised by mvridge."""


class InvalidInputError(MVRidgeError, ValueError):
    """Malformed, empty, or out-of-domain input data."""


class NonFiniteError(InvalidInputError):
    """Input contains NaN or infinite samples."""


class ShapeError(MVRidgeError, ValueError):
    """Arrays that must share a shape do not."""


class UnsupportedOrderError(MVRidgeError, ValueError):
    """A derivative order outside the supported range was requested."""


class InvalidGridError(MVRidgeError, ValueError):
    """Scale grid is malformed or reaches past the Nyquist frequency."""


class GridTooSmallError(InvalidGridError):
    """Ridge detection needs at least three scale levels."""


class MissingDerivativeError(MVRidgeError, ValueError):
    """A transform time-derivative cube was needed but not computed."""


class NotModulatedError(MVRidgeError, ValueError):
    """Stability level at or above one: not a modulated oscillation."""


class EmptyIntervalError(MVRidgeError, ValueError):
    """No valid samples remain in the requested interval."""
