"""Exception hierarchy shared across the package."""


class CaroSegError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgument(CaroSegError, ValueError):
    """An argument violates a documented precondition."""


class OutOfRange(CaroSegError, ValueError):
    """A query point falls outside the supported span (no extrapolation)."""


class RoiTooNarrow(InvalidArgument):
    """The region of interest is narrower than one patch width (128 px)."""


class NoRegion(CaroSegError):
    """A segmentation map contains no foreground region."""


class PatchUnplaceable(CaroSegError):
    """A fixed-height patch cannot fit inside the image even after shifting."""


class CrossingContours(InvalidArgument):
    """An upper contour dips below its lower counterpart."""

    def __init__(self, column: int):
        self.column = column
        super().__init__(f"contours cross at column {column}")


class WeightFormatError(CaroSegError):
    """Base class for weight-file parsing failures."""


class BadMagic(WeightFormatError):
    pass


class TruncatedWeights(WeightFormatError):
    pass


class ChecksumMismatch(WeightFormatError):
    pass


class EmptyWeights(WeightFormatError):
    pass


class ShapeMismatch(WeightFormatError):
    """A tensor's shape disagrees with the network configuration."""

    def __init__(self, layer: str, expected, actual):
        self.layer = layer
        self.expected = tuple(expected)
        self.actual = tuple(actual)
        super().__init__(
            f"layer '{layer}': expected shape {self.expected}, got {self.actual}"
        )


class StateError(CaroSegError):
    """An operation was requested in a work-item state that forbids it."""
