"""Exception types shared across the package."""


class AlignetError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(AlignetError, ValueError):
    """An input file could not be parsed; message names the file and line."""


class ValidationError(AlignetError, ValueError):
    """A constructed object violates one of its structural invariants."""


class ShapeError(AlignetError, ValueError):
    """Array dimensions are inconsistent with the configured sizes."""


class SamplingError(AlignetError, RuntimeError):
    """Not enough candidate pairs exist to draw the requested sample."""


class GenerationError(AlignetError, RuntimeError):
    """Synthetic-pair parameters are infeasible."""


class NumericalError(AlignetError, ArithmeticError):
    """A loss or gradient became non-finite; message names the component."""


class EvaluationError(AlignetError, ValueError):
    """Metric computation was asked for an empty or malformed score set."""


class EmptyNeighborhoodError(AlignetError, ValueError):
    """Softmax normalization requested over an empty neighbor/partner union."""
