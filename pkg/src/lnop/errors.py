"""Exception hierarchy shared across the package."""


class LnopError(Exception):
    """Base class for all package errors."""


class DimensionError(LnopError, ValueError):
    """Tensor extents disagree with what an operation requires."""


class ContractError(LnopError, ValueError):
    """An operation was called outside its contract (e.g. backward on a non-scalar)."""


class NonFiniteError(LnopError, ArithmeticError):
    """A NaN or Inf appeared in a tensor, gradient or loss."""


class ModeError(LnopError, ValueError):
    """Requested mode count exceeds what the grid can carry."""


class ResolutionError(LnopError, ValueError):
    """Resolution change with a non-integer ratio or indivisible extent."""


class ConfigError(LnopError, ValueError):
    """Invalid configuration value or combination."""


class SolverError(LnopError, RuntimeError):
    """A numerical PDE solver failed (non-convergence, blow-up, step underflow)."""


class MetricError(LnopError, ValueError):
    """A metric is undefined for its inputs."""


class FormatError(LnopError, IOError):
    """A binary container is malformed or truncated."""
