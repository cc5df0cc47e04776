"""Exception types raised by the solvers and studies."""


class PlaneVortexError(Exception):
    """Base class for all package errors."""


class EmptyRegionError(PlaneVortexError, ValueError):
    """A region selected no grid nodes."""


class CirculationUndefinedError(PlaneVortexError, ValueError):
    """Vorticity is not compactly supported on the grid."""


class DomainTooSmallError(PlaneVortexError):
    """Vorticity reached the guard band of the computational square."""


class TimestepUnderflowError(PlaneVortexError):
    """The advective CFL condition could not be met with a usable timestep."""


class ConfigError(PlaneVortexError, ValueError):
    """An experiment configuration is malformed or out of range."""


class EnsembleMemberError(PlaneVortexError):
    """A member solve failed; ``index`` identifies the member."""

    def __init__(self, index: int, cause: Exception):
        super().__init__(f"member {index}: {cause}")
        self.index = index
        self.cause = cause
