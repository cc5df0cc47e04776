"""Planar incompressible flows with nonzero circulation.

Whole-plane and no-slip disk solvers in vorticity form, the stationary
vortex sigma_m and the disk projections built from it, deterministic
verification studies, and finitely supported statistical solutions.
"""

from .errors import (CirculationUndefinedError, ConfigError, DomainTooSmallError, EmptyRegionError,
                     EnsembleMemberError, PlaneVortexError, TimestepUnderflowError)
from .fields import (AnnulusRegion, GridSpec2D, PolarGrid2D, ScalarField2D, VectorField2D, curl,
                     divergence, norm_h1, norm_lp)
from .solver_disk import DiskState, solve_disk
from .solver_plane import PlaneState, SolverConfig, Trajectory, solve, solve_euler, step
from .stationary import RadialProfile, StationaryVortex, make_sigma1

__all__ = [
    "AnnulusRegion", "CirculationUndefinedError", "ConfigError", "DiskState", "DomainTooSmallError",
    "EmptyRegionError", "EnsembleMemberError", "GridSpec2D", "PlaneState", "PlaneVortexError",
    "PolarGrid2D", "RadialProfile", "ScalarField2D", "SolverConfig", "StationaryVortex",
    "TimestepUnderflowError", "Trajectory", "VectorField2D", "curl", "divergence", "make_sigma1",
    "norm_h1", "norm_lp", "solve", "solve_disk", "solve_euler", "step",
]

__version__ = "0.1.0"
