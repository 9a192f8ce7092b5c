"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation."""


class NumericError(ArithmeticError):
    """A numerical procedure failed to reach its tolerance.

    ``best`` carries the best value found before giving up.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class NonConvergenceError(NumericError):
    """Newton or eigen iteration gave up; ``history`` lists residuals."""

    def __init__(self, message, best=None, residual=None, history=()):
        super().__init__(message, best=best, residual=residual)
        self.history = list(history)


class BlowUpError(NumericError):
    """A radial integration left the overflow guard at ``radius``.

    ``profile`` holds the truncated profile up to the last finite node.
    """

    def __init__(self, message, radius, profile=None):
        super().__init__(message, best=profile)
        self.radius = radius
        self.profile = profile
