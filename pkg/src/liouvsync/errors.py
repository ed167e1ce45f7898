"""Exception hierarchy shared by all modules."""


class LiouvsyncError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(LiouvsyncError, ValueError):
    """Operands have incompatible shapes."""


class InvalidStateError(LiouvsyncError, ValueError):
    """A matrix fails the density-matrix invariants."""


class NumericalError(LiouvsyncError, ArithmeticError):
    """A numerical procedure failed or produced an untrustworthy result."""


class UnphysicalSpectrumError(NumericalError):
    """A Liouvillian eigenvalue has a positive real part beyond tolerance."""


class NotSteadyStateError(NumericalError):
    """The supplied state is not annihilated by the Liouvillian."""


class ConvergenceError(NumericalError):
    """An iterative procedure did not converge."""


class ConfigError(LiouvsyncError, ValueError):
    """A sweep configuration or CLI argument is invalid."""
