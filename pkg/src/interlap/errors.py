"""Exception hierarchy shared across the package."""


class InterlapError(Exception):
    """Base class for every error raised by this package."""


class GraphError(InterlapError, ValueError):
    pass


class IndexOutOfRange(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


class EmptyGraph(GraphError):
    pass


class NotConnected(GraphError):
    pass


class DimensionMismatch(InterlapError, ValueError):
    pass


class ZeroVector(InterlapError, ValueError):
    pass


class TooLarge(InterlapError, ValueError):
    pass


class InvalidK(InterlapError, ValueError):
    pass


KTooLarge = InvalidK


class ZeroColumn(InterlapError, ValueError):
    pass


class NoConvergence(InterlapError, RuntimeError):
    """Raised when an iterative eigensolver exhausts its budget.

    ``residuals`` and ``eigenvalues`` hold the best approximation reached.
    """

    def __init__(self, message, eigenvalues=None, residuals=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.residuals = residuals


class InvalidProbability(InterlapError, ValueError):
    pass


class EmptyBlocks(InterlapError, ValueError):
    pass


class OddN(InterlapError, ValueError):
    pass


class ParseError(InterlapError, ValueError):
    def __init__(self, message, line=None, path=None):
        where = f"{path}:{line}: " if path is not None else (f"line {line}: " if line else "")
        super().__init__(where + message)
        self.line = line
        self.path = path


class MissingLabels(InterlapError, ValueError):
    pass


class InvalidFraction(InterlapError, ValueError):
    pass


class InvalidRatio(InterlapError, ValueError):
    pass


class TooSmall(InterlapError, ValueError):
    pass


class ShapeMismatch(InterlapError, ValueError):
    pass


class NonFiniteValue(InterlapError, FloatingPointError):
    pass


NonFiniteLoss = NonFiniteValue


class InvalidConfig(InterlapError, ValueError):
    pass


class TooFewValues(InterlapError, ValueError):
    pass
