"""Initial vorticity distributions used by the studies and tests."""

from __future__ import annotations

import math

import numpy as np

from .fields import GridSpec2D, ScalarField2D


def gaussian_vorticity(grid: GridSpec2D, circulation: float = 1.0, core: float = 1.0,
                       center=(0.0, 0.0)) -> ScalarField2D:
    """Lamb-Oseen profile circulation / (pi a^2) exp(-|x - c|^2 / a^2)."""
    x, y = grid.mesh
    r2 = (x - center[0]) ** 2 + (y - center[1]) ** 2
    return ScalarField2D(grid, circulation / (math.pi * core**2) * np.exp(-r2 / core**2))


def lamb_oseen_vorticity(grid: GridSpec2D, t: float, nu: float, circulation: float = 1.0,
                         core: float = 1.0) -> ScalarField2D:
    """Exact heat evolution of `gaussian_vorticity` after time t."""
    return gaussian_vorticity(grid, circulation, math.sqrt(core**2 + 4.0 * nu * t))


def patch_vorticity(grid: GridSpec2D, strength: float = 1.0, semi_axes=(1.0, 1.0),
                    center=(0.0, 0.0), angle: float = 0.0, edge: float = 0.0) -> ScalarField2D:
    """Elliptical vortex patch of uniform strength.

    ``edge`` = 0 gives the characteristic function sampled at cell centres;
    ``edge`` > 0 smooths the boundary with a tanh layer of that width,
    measured in units of the (scaled) ellipse radius.
    """
    x, y = grid.mesh
    c, s = math.cos(angle), math.sin(angle)
    xr = c * (x - center[0]) + s * (y - center[1])
    yr = -s * (x - center[0]) + c * (y - center[1])
    rho = np.sqrt((xr / semi_axes[0]) ** 2 + (yr / semi_axes[1]) ** 2)
    if edge <= 0.0:
        vals = np.where(rho <= 1.0, strength, 0.0)
    else:
        vals = 0.5 * strength * (1.0 - np.tanh((rho - 1.0) / edge))
        vals[np.abs(vals) < 1e-14 * abs(strength)] = 0.0
    return ScalarField2D(grid, vals)


def superpose(*fields: ScalarField2D) -> ScalarField2D:
    out = fields[0]
    for f in fields[1:]:
        out = out + f
    return out


def level_set_area(omega: ScalarField2D, level: float) -> float:
    """Area of {omega >= level} by cell counting."""
    g = omega.grid
    return float(np.count_nonzero(omega.values >= level) * g.h * g.h)


def heat_vs_frozen_l2_sq(circulation: float, core: float, nu: float, t: float) -> float:
    """Squared L^2 distance between heat-evolved and frozen Gaussian vortex velocities.

    Both fields are azimuthal; the radial integral reduces to a Frullani
    integral with the closed form (Gamma^2 / 4 pi) log((a + b)^2 / (4 a b)),
    a = 1/core^2, b = 1/(core^2 + 4 nu t).
    """
    a = 1.0 / core**2
    b = 1.0 / (core**2 + 4.0 * nu * t)
    return circulation**2 / (4.0 * math.pi) * math.log((a + b) ** 2 / (4.0 * a * b))
