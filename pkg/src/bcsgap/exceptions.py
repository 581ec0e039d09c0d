"""Exception types raised across the package."""


class ConvergenceError(RuntimeError):
    """An iterative procedure hit its cap before meeting the tolerance.

    ``estimate`` holds the best value available when the procedure stopped and
    ``error`` the last achieved error estimate (or enclosure width).
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class BracketError(ValueError):
    """A root-finding bracket does not straddle a sign change."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class ModelError(ValueError):
    """The physical model is inconsistent (e.g. a potential leaves [U1, U2])."""


class CouplingWindowError(ModelError):
    """U2 * a >= 1, so the temperature-Lipschitz constant is undefined."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigurationError(ValueError):
    """Invalid solver or run configuration."""


class CertificateError(RuntimeError):
    """An order or bracket property that the monotone iteration relies on failed."""


class SliceConvergenceError(ConvergenceError):
    """A temperature slice did not converge; ``T`` names it and ``partial``
    holds the slices finished before it."""

    def __init__(self, message, T, estimate=None, error=None, partial=()):
        super().__init__(message, estimate=estimate, error=error)
        self.T = T
        self.partial = list(partial)
