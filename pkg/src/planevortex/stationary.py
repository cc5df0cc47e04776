"""The stationary vortex sigma_1, the decomposition u = sigma_m + v, and cutoffs.

The vortex is built from a radial vorticity profile g supported in the unit
disk with unit total mass.  Its velocity is azimuthal,

    sigma_1(x) = Gamma(|x|) / (2 pi |x|^2) * (-x_2, x_1),

where Gamma(r) is the vorticity mass inside radius r, so
|sigma_1(x)| = 1 / (2 pi |x|) outside the unit disk.  The stream function satisfies Laplacian(psi) = g with
psi(0) = 0 and equals C_2 + log|x| / (2 pi) for |x| >= 1.

Sign convention: u = grad^perp psi = (-d_y psi, d_x psi) and
omega = d_x u_2 - d_y u_1 = Laplacian(psi), used throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy import integrate, interpolate

from .errors import CirculationUndefinedError
from .fields import GridSpec2D, PolarGrid2D, ScalarField2D, VectorField2D, curl

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class RadialProfile:
    """Radial vorticity profile g on [0, 1] with unit mass in the plane.

    ``polynomial(k)`` gives the default bump g = (k + 1)/pi (1 - rho^2)^k, for
    which every derived quantity has a closed form.  ``from_function`` wraps a
    user profile and normalizes it numerically.
    """

    g: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    kind: str = "polynomial"
    exponent: int | None = 3

    @classmethod
    def polynomial(cls, k: int = 3) -> "RadialProfile":
        if k < 1:
            raise ValueError(f"exponent must be >= 1, got {k}")
        c = (k + 1) / math.pi

        def g(rho):
            rho = np.asarray(rho, dtype=float)
            return np.where(rho < 1.0, c * np.clip(1.0 - rho * rho, 0.0, None) ** k, 0.0)

        return cls(g=g, kind="polynomial", exponent=k)

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], name: str = "custom") -> "RadialProfile":
        """Normalize an arbitrary profile; raises if it is not supported in [0, 1]."""
        probe = np.linspace(1.0, 3.0, 401)
        if np.any(np.abs(np.asarray(func(probe), dtype=float)) > 0.0):
            raise ValueError("profile must vanish for rho >= 1")
        mass, _ = integrate.quad(lambda s: TWO_PI * s * float(func(s)), 0.0, 1.0, limit=200)
        if not mass > 0.0:
            raise ValueError("profile must have positive mass")

        def g(rho):
            return np.asarray(func(np.asarray(rho, dtype=float)), dtype=float) / mass

        return cls(g=g, kind=name, exponent=None)

    def __call__(self, rho):
        return self.g(rho)


@dataclass(frozen=True)
class StationaryVortex:
    """The field sigma_1 built from a radial profile.

    ``gamma`` is evaluated in closed form for polynomial profiles; otherwise it
    is tabulated by adaptive quadrature and interpolated with a cubic spline.
    """

    profile: RadialProfile = field(default_factory=RadialProfile.polynomial)
    table_size: int = 2049

    @cached_property
    def _tables(self):
        rr = np.linspace(0.0, 1.0, self.table_size)
        gam = np.zeros_like(rr)
        psi = np.zeros_like(rr)
        for i in range(1, rr.size):
            seg, _ = integrate.quad(lambda s: TWO_PI * s * float(self.profile(s)), rr[i - 1], rr[i])
            gam[i] = gam[i - 1] + seg
        gam /= gam[-1]
        gspline = interpolate.CubicSpline(rr, gam)
        # psi'(r) = Gamma(r) / (2 pi r), and Gamma(r) ~ pi g(0) r^2 near the axis
        for i in range(1, rr.size):
            seg, _ = integrate.quad(lambda s: float(gspline(s)) / (TWO_PI * s) if s > 0 else 0.0,
                                    rr[i - 1], rr[i])
            psi[i] = psi[i - 1] + seg
        return gspline, interpolate.CubicSpline(rr, psi)

    @property
    def _closed_form(self) -> bool:
        return self.profile.kind == "polynomial" and self.profile.exponent is not None

    def gamma(self, r) -> np.ndarray:
        """Vorticity mass Gamma(r) inside radius r (1 for r >= 1)."""
        r = np.asarray(r, dtype=float)
        if self._closed_form:
            k = self.profile.exponent
            return np.where(r < 1.0, 1.0 - np.clip(1.0 - r * r, 0.0, None) ** (k + 1), 1.0)
        gspline, _ = self._tables
        return np.where(r < 1.0, gspline(np.clip(r, 0.0, 1.0)), 1.0)

    @cached_property
    def c2(self) -> float:
        """Constant C_2 in psi = C_2 + log r / (2 pi) outside the unit disk."""
        if self._closed_form:
            k = self.profile.exponent
            return sum(1.0 / (j + 1) for j in range(k + 1)) / (2.0 * TWO_PI)
        _, pspline = self._tables
        return float(pspline(1.0))

    def stream(self, r) -> np.ndarray:
        """Stream function psi_sigma1 as a function of radius, psi(0) = 0."""
        r = np.asarray(r, dtype=float)
        outside = self.c2 + np.log(np.maximum(r, 1.0)) / TWO_PI
        if self._closed_form:
            k = self.profile.exponent
            q = np.clip(1.0 - r * r, 0.0, None)
            inside = sum((1.0 - q ** (j + 1)) / (j + 1) for j in range(k + 1)) / (2.0 * TWO_PI)
        else:
            _, pspline = self._tables
            inside = pspline(np.clip(r, 0.0, 1.0))
        return np.where(r < 1.0, inside, outside)

    def vorticity(self, r) -> np.ndarray:
        return self.profile(np.asarray(r, dtype=float))

    def _radial_factor(self, r: np.ndarray) -> np.ndarray:
        """F(r) = Gamma(r) / (2 pi r^2), finite at the axis."""
        small = r < 1e-6
        rs = np.where(small, 1.0, r)
        f = self.gamma(rs) / (TWO_PI * rs * rs)
        return np.where(small, 0.5 * self.profile(np.zeros_like(r)), f)

    def velocity(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """Components of sigma_1 at points (x, y)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        f = self._radial_factor(np.hypot(x, y))
        return -f * y, f * x

    def velocity_gradient(self, x, y) -> np.ndarray:
        """Array ``G[i, j] = d sigma_i / d x_j`` at points (x, y)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        f = self._radial_factor(r)
        rs = np.where(r < 1e-6, 1.0, r)
        # F'(r) / r, with F' = g / r - Gamma / (pi r^3); it vanishes at the axis
        dfr = np.where(r < 1e-6, 0.0,
                       (self.profile(rs) / rs - self.gamma(rs) / (math.pi * rs**3)) / rs)
        return np.array([[-dfr * x * y, -dfr * y * y - f],
                         [dfr * x * x + f, dfr * x * y]])


@dataclass(frozen=True)
class Decomposition:
    """u = sigma_m + v with circulation m and square-integrable part v."""

    m: float
    v: VectorField2D


def eval_sigma_m(vortex: StationaryVortex, m: float, points) -> VectorField2D | tuple[np.ndarray, np.ndarray]:
    """m * sigma_1 sampled on a grid, or at an (x, y) pair of arrays."""
    if isinstance(points, (GridSpec2D, PolarGrid2D)):
        x, y = points.mesh
        u1, u2 = vortex.velocity(x, y)
        return VectorField2D(points, m * np.array([u1, u2]))
    x, y = points
    u1, u2 = vortex.velocity(x, y)
    return m * u1, m * u2


def make_sigma1(profile: RadialProfile | None = None) -> StationaryVortex:
    return StationaryVortex(profile or RadialProfile.polynomial())


def discrete_profile(vortex: StationaryVortex, grid: GridSpec2D) -> np.ndarray:
    """Samples of g on the grid rescaled to unit discrete mass."""
    g = vortex.vorticity(grid.radius)
    return g / np.sum(g * grid.weights)


def check_compact(omega: np.ndarray, grid: GridSpec2D, frac: float = 0.5, tol: float = 1e-3) -> None:
    """Raise unless |omega| mass outside frac * extent is below tol of the total."""
    x, y = grid.mesh
    outside = np.maximum(np.abs(x), np.abs(y)) > frac * grid.extent
    total = np.sum(np.abs(omega))
    if total > 0 and np.sum(np.abs(omega[outside])) > tol * total:
        raise CirculationUndefinedError("circulation undefined on this grid")


def decompose(u: VectorField2D, vortex: StationaryVortex | None = None, tol: float = 1e-3) -> Decomposition:
    """Split a Cartesian velocity field into sigma_m plus a remainder.

    m is the midpoint quadrature of curl(u) over the grid and v = u - m sigma_1.
    """
    vortex = vortex or make_sigma1()
    omega = curl(u)
    check_compact(omega.values, u.grid, tol=tol)
    m = omega.integral()
    return Decomposition(m, u - eval_sigma_m(vortex, m, u.grid))


def decompose_vorticity(omega: ScalarField2D, vortex: StationaryVortex) -> tuple[float, np.ndarray]:
    """Circulation and vorticity of the remainder, from vorticity samples.

    The remainder vorticity has exactly zero discrete mass because the vortex
    profile is rescaled to unit discrete mass on the grid.
    """
    m = omega.integral()
    return m, omega.values - m * discrete_profile(vortex, omega.grid)


def sigma1_annulus_h1_sq(R: float) -> float:
    """Closed-form annulus scale beta(R)^2 = 2 pi log(R / (R-1)) + pi ((R-1)^-2 - R^-2).

    This is the squared L^2 norm of x^perp / |x|^2 on R - 1 <= |x| <= R plus
    the squared L^2 norm of its radial derivative.  It is the reference scale
    of the projection error; it is not the grid H^1 norm of the unit-circulation
    sigma_1, which is smaller by (2 pi)^2 in the L^2 part.
    """
    if R < 2:
        raise ValueError(f"closed form needs R >= 2, got {R}")
    return TWO_PI * math.log(R / (R - 1.0)) + math.pi * ((R - 1.0) ** -2 - R**-2)


def beta(R: float) -> float:
    return math.sqrt(sigma1_annulus_h1_sq(R))


# --- cutoffs -----------------------------------------------------------------

def smoothstep(x):
    """Quintic s(x) = 6x^5 - 15x^4 + 10x^3 clipped to [0, 1]."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return x**3 * (10.0 + x * (-15.0 + 6.0 * x))


def smoothstep_prime(x):
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    return np.where(inside, 30.0 * x * x * (1.0 - x) ** 2, 0.0)


def collar_profile(d):
    """S(d): 0 at d = 0, rising to 1 at d = 1/2 and flat on [1/2, 1]."""
    return smoothstep(2.0 * np.asarray(d, dtype=float))


def collar_profile_prime(d):
    return 2.0 * smoothstep_prime(2.0 * np.asarray(d, dtype=float))


def bulk_profile(rho):
    """phi_1(rho): 1 on [0, 1/2], quintic descent to 0 at rho = 1."""
    return smoothstep(2.0 * (1.0 - np.asarray(rho, dtype=float)))


def bulk_profile_prime(rho):
    return -2.0 * smoothstep_prime(2.0 * (1.0 - np.asarray(rho, dtype=float)))


def collar_cutoff(r, R: float):
    """h_R as a function of radius: 1 inside R - 1/2, 0 beyond R."""
    return collar_profile(R - np.asarray(r, dtype=float))


def collar_cutoff_prime(r, R: float):
    return -collar_profile_prime(R - np.asarray(r, dtype=float))


def bulk_cutoff(r, R: float):
    """phi_R as a function of radius: 1 inside R/2, 0 beyond R."""
    return bulk_profile(np.asarray(r, dtype=float) / R)


def bulk_cutoff_prime(r, R: float):
    return bulk_profile_prime(np.asarray(r, dtype=float) / R) / R


def radial_gradient(dfdr, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Cartesian gradient of a radial function from its radial derivative."""
    r = np.hypot(x, y)
    rs = np.where(r > 0, r, 1.0)
    return dfdr * x / rs, dfdr * y / rs


@dataclass(frozen=True)
class CutoffPair:
    R: float
    h_R: ScalarField2D
    phi_R: ScalarField2D


def make_cutoffs(R: float, grid: GridSpec2D) -> CutoffPair:
    """Sample the collar cutoff h_R and the bulk cutoff phi_R on a grid."""
    if R < 1:
        raise ValueError(f"R must be >= 1, got {R}")
    if R > grid.extent:
        raise ValueError(f"R = {R} exceeds grid extent {grid.extent}")
    r = grid.radius
    return CutoffPair(R, ScalarField2D(grid, collar_cutoff(r, R)), ScalarField2D(grid, bulk_cutoff(r, R)))
