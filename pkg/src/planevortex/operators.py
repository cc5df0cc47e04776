"""Operators carrying whole-plane velocity data onto the disk of radius R.

For u = sigma_m + v with stream function psi_v of v, the approximate
projection onto velocities vanishing on the circle |x| = R is

    U_R u = grad^perp(h_R (psi_sigma_m - psi_sigma_m(R))) + grad^perp(phi_R (psi_v - c)),

and the truncation keeping only zero normal velocity is

    Ubar_R u = sigma_m restricted to the disk + grad^perp(phi_R psi_v).

Both are evaluated pointwise from the product rule, so no numerical
differentiation enters: grad^perp(a b) = a grad^perp b + b grad^perp a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .biot_savart import get_plan
from .fields import (AnnulusRegion, GridSpec2D, ScalarField2D, VectorField2D, curl,
                     h1_parts, sample_cartesian)
from .stationary import (StationaryVortex, beta, bulk_cutoff, bulk_cutoff_prime,
                         check_compact, collar_cutoff, collar_cutoff_prime, discrete_profile,
                         make_sigma1, radial_gradient)


def _perp(gx, gy):
    return -gy, gx


@dataclass(frozen=True)
class DiskData:
    """Closed-form description of U_R u (or Ubar_R u) evaluable at any point.

    Attributes
    ----------
    m : float
        Circulation of the whole-plane field.
    psi_v, v : ndarray
        Stream function and velocity of the square-integrable part at the
        Cartesian cell centres of ``grid``.
    gauge : float
        Constant subtracted from psi_v.
    no_slip : bool
        True for U_R (collar cutoff on sigma_m), False for the truncation.
    """

    grid: GridSpec2D
    vortex: StationaryVortex
    R: float
    m: float
    psi_v: np.ndarray
    v: np.ndarray
    gauge: float
    no_slip: bool = True

    def _sample(self, arr, x, y):
        return sample_cartesian(arr, self.grid, x, y)

    def stream(self, x, y) -> np.ndarray:
        """Stream function of the disk field (zero on the wall for U_R)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        psi_s = self.m * self.vortex.stream(r)
        if self.no_slip:
            psi_s = collar_cutoff(r, self.R) * (psi_s - self.m * float(self.vortex.stream(self.R)))
        return psi_s + bulk_cutoff(r, self.R) * (self._sample(self.psi_v, x, y) - self.gauge)

    def velocity(self, x, y, psi_v=None, v=None) -> np.ndarray:
        """Velocity of the disk field at points; zero outside the disk."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        R = self.R
        s1, s2 = self.vortex.velocity(x, y)
        if psi_v is None:
            psi_v = self._sample(self.psi_v, x, y)
        if v is None:
            v = np.array([self._sample(self.v[0], x, y), self._sample(self.v[1], x, y)])
        phi = bulk_cutoff(r, R)
        pgx, pgy = _perp(*radial_gradient(bulk_cutoff_prime(r, R), x, y))
        w = psi_v - self.gauge
        out1 = phi * v[0] + w * pgx
        out2 = phi * v[1] + w * pgy
        if self.no_slip:
            h = collar_cutoff(r, R)
            hgx, hgy = _perp(*radial_gradient(collar_cutoff_prime(r, R), x, y))
            shifted = self.m * (self.vortex.stream(r) - float(self.vortex.stream(R)))
            out1 += self.m * h * s1 + shifted * hgx
            out2 += self.m * h * s2 + shifted * hgy
        else:
            inside = r <= R
            out1 += np.where(inside, self.m * s1, 0.0)
            out2 += np.where(inside, self.m * s2, 0.0)
        return np.array([out1, out2])

    def on_grid(self) -> VectorField2D:
        """The disk field at the cell centres of the source grid."""
        x, y = self.grid.mesh
        return VectorField2D(self.grid, self.velocity(x, y, psi_v=self.psi_v, v=self.v))

    @cached_property
    def stream_on_grid(self) -> np.ndarray:
        x, y = self.grid.mesh
        r = self.grid.radius
        psi_s = self.m * self.vortex.stream(r)
        if self.no_slip:
            psi_s = collar_cutoff(r, self.R) * (psi_s - self.m * float(self.vortex.stream(self.R)))
        else:
            psi_s = np.where(r <= self.R, psi_s, 0.0)
        return psi_s + bulk_cutoff(r, self.R) * (self.psi_v - self.gauge)


def _split(u: VectorField2D, vortex: StationaryVortex, vorticity: ScalarField2D | None):
    """Circulation, remainder velocity and remainder stream function."""
    grid = u.grid
    if not isinstance(grid, GridSpec2D):
        raise TypeError("whole-plane data must live on a Cartesian grid")
    omega = vorticity if vorticity is not None else curl(u)
    check_compact(omega.values, grid)
    m = omega.integral()
    s1, s2 = vortex.velocity(*grid.mesh)
    v = u.values - m * np.array([s1, s2])
    omega_v = omega.values - m * discrete_profile(vortex, grid)
    psi_v = get_plan(grid).stream(omega_v)
    return m, v, psi_v


def _check_radius(R: float, grid: GridSpec2D, minimum: float = 2.0):
    if not (minimum <= R <= grid.extent):
        raise ValueError(f"R must lie in [{minimum}, {grid.extent}], got {R}")


def disk_mean(values: np.ndarray, grid: GridSpec2D, R: float) -> float:
    inside = grid.radius <= R
    return float(np.sum(values[inside]) / np.count_nonzero(inside))


def approx_project_data(u: VectorField2D, vortex: StationaryVortex | None, R: float,
                        vorticity: ScalarField2D | None = None, gauge: str = "disk-mean") -> DiskData:
    """Closed-form U_R u; ``gauge`` is 'disk-mean' or 'free-space' for psi_v."""
    vortex = vortex or make_sigma1()
    _check_radius(R, u.grid)
    m, v, psi_v = _split(u, vortex, vorticity)
    if gauge == "disk-mean":
        c = disk_mean(psi_v, u.grid, R)
    elif gauge == "free-space":
        c = 0.0
    else:
        raise ValueError(f"unknown gauge {gauge!r}")
    return DiskData(u.grid, vortex, R, m, psi_v, v, c, no_slip=True)


def approx_project_VR(u: VectorField2D, vortex: StationaryVortex | None = None, R: float = 8.0,
                      vorticity: ScalarField2D | None = None) -> VectorField2D:
    """U_R u sampled at the cell centres (zero outside the disk).

    The additive constant of psi_v is fixed by zero mean over the disk.
    """
    return approx_project_data(u, vortex, R, vorticity).on_grid()


def truncate_data(u: VectorField2D, vortex: StationaryVortex | None, R: float,
                  vorticity: ScalarField2D | None = None) -> DiskData:
    vortex = vortex or make_sigma1()
    _check_radius(R, u.grid)
    m, v, psi_v = _split(u, vortex, vorticity)
    return DiskData(u.grid, vortex, R, m, psi_v, v, 0.0, no_slip=False)


def truncate_Y(u: VectorField2D, vortex: StationaryVortex | None = None, R: float = 8.0,
               vorticity: ScalarField2D | None = None) -> VectorField2D:
    """sigma_m on the disk plus grad^perp(phi_R psi_v), with decaying psi_v."""
    return truncate_data(u, vortex, R, vorticity).on_grid()


def project_HR(u: VectorField2D, R: float, vortex: StationaryVortex | None = None,
               vorticity: ScalarField2D | None = None) -> VectorField2D:
    """Surrogate for restriction to the disk followed by the Leray projection.

    Uses the same construction as `truncate_Y`: the result is divergence-free
    with zero normal velocity on the wall and agrees with u on the disk of
    radius R/2.
    """
    return truncate_Y(u, vortex, R, vorticity)


@dataclass(frozen=True)
class ProjectionRow:
    R: float
    err_h1: float
    bound: float
    ratio: float
    beta: float
    constant: float


def projection_error_report(u: VectorField2D, vortex: StationaryVortex | None, R_list,
                            vorticity: ScalarField2D | None = None) -> list[ProjectionRow]:
    """H^1(disk) error of U_R against the bound ||v||_{H^1(R/2 < |x| < R)} + |m| beta(R).

    ``ratio`` is bound / error and ``constant`` = error / bound is the factor
    needed in front of the bound.
    """
    vortex = vortex or make_sigma1()
    rows = []
    for R in R_list:
        data = approx_project_data(u, vortex, R, vorticity)
        diff = u - data.on_grid()
        err = sum(h1_parts(diff, AnnulusRegion(0.0, R)))
        v_field = VectorField2D(u.grid, data.v)
        tail = sum(h1_parts(v_field, AnnulusRegion(R / 2.0, R)))
        b = beta(R)
        bound = tail + abs(data.m) * b
        rows.append(ProjectionRow(R, err, bound, bound / err if err > 0 else math.inf, b,
                                  err / bound if bound > 0 else math.inf))
    return rows
