class NumericalError(ArithmeticError):
    """A linear solve left a residual above its stated tolerance."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap.

    Carries the best iterate found and its remaining duality gap.
    """

    def __init__(self, message, best=None, weights=None, gap=None):
        super().__init__(message)
        self.best = best
        self.weights = weights
        self.gap = gap


class MaxIterationsError(RuntimeError):
    """The apprenticeship loop did not terminate; ``result`` holds the partial run."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
