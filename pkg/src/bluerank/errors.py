"""Exception types raised by bluerank."""


class BluerankError(ValueError):
    """Base class for all errors raised by this package."""


class DataFormatError(BluerankError):
    """Malformed CSV or IDX input."""


class GraphError(BluerankError):
    """Invalid graph parameters or a degenerate graph."""


class SpectralError(BluerankError):
    """Eigendecomposition or transform failure."""


class DimensionError(BluerankError):
    """A per-dimension scoring step failed.

    The failing dimension is kept on ``dimension`` so callers can report it.
    """

    def __init__(self, dimension, message):
        super().__init__(f"dimension {dimension}: {message}")
        self.dimension = dimension
