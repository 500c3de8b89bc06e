"""Exception types raised by detgeom."""


class DetGeomError(Exception):
    """Base class for all library errors."""


class ErasureError(DetGeomError):
    """An observation rules out an input symbol (zero posterior).

    The embedding takes logarithms of posteriors, so an observation that
    assigns probability zero to any hypothesis has no image in R^N.  Erasure
    channels are therefore outside the reach of the representation.
    """

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at sequence position {position})"
        super().__init__(message)
        self.position = position


class DegeneratePosteriorError(ErasureError):
    """A posterior component underflowed to exactly zero."""


class UnknownObservationError(DetGeomError, KeyError):
    """A label is not part of a discrete channel's observation alphabet."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class NonUniformPriorError(DetGeomError, ValueError):
    """Repetition aggregation was requested under a non-uniform prior."""


class EnumerationCapError(DetGeomError, ValueError):
    """A codebook enumeration would exceed ``ENUMERATION_CAP`` codewords."""


class SpecError(DetGeomError, ValueError):
    """A channel specification file is malformed or violates an invariant."""


class EstimatorError(DetGeomError, ValueError):
    """A distance estimator cannot satisfy its accuracy contract."""
