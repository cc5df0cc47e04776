"""Grids, gridded fields, discrete derivatives and region-restricted norms.

Two grid kinds are supported.  `GridSpec2D` is the uniform cell-centred
Cartesian grid on the square [-L, L]^2 used by the whole-plane solver.
`PolarGrid2D` is the stretched polar grid on the disk of radius R used by the
no-slip disk solver; its last ring sits on the wall r = R.

Fields are immutable: the value arrays are copied and marked read-only on
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
from scipy import ndimage, optimize

from .errors import EmptyRegionError


@dataclass(frozen=True)
class GridSpec2D:
    """Uniform cell-centred grid on [-L, L]^2.

    Node ``(i, j)`` sits at ``(-L + (i + 1/2) h, -L + (j + 1/2) h)`` with
    ``h = 2L / n``; arrays are indexed ``[i, j]`` with ``i`` along x.
    """

    extent: float
    n: int

    kind = "cartesian"

    def __post_init__(self):
        if not (self.extent > 0 and math.isfinite(self.extent)):
            raise ValueError(f"extent must be positive, got {self.extent}")
        if self.n < 16 or self.n % 2:
            raise ValueError(f"n must be even and >= 16, got {self.n}")

    @property
    def h(self) -> float:
        return 2.0 * self.extent / self.n

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @cached_property
    def axis(self) -> np.ndarray:
        """Cell-centre coordinates along one axis."""
        return -self.extent + (np.arange(self.n) + 0.5) * self.h

    @cached_property
    def corner_axis(self) -> np.ndarray:
        """Cell-corner coordinates along one axis (n + 1 values)."""
        return -self.extent + np.arange(self.n + 1) * self.h

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return tuple(np.meshgrid(self.axis, self.axis, indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        x, y = self.mesh
        return np.hypot(x, y)

    @cached_property
    def weights(self) -> np.ndarray:
        """Midpoint-rule quadrature weights (all equal to h^2)."""
        return np.full(self.shape, self.h * self.h)

    def region_mask(self, region: "AnnulusRegion | None") -> np.ndarray:
        if region is None:
            return np.ones(self.shape, dtype=bool)
        return region.contains(self.radius)


@dataclass(frozen=True)
class PolarGrid2D:
    """Stretched polar grid on the closed disk of radius R.

    Rings ``i = 0 .. n_r`` sit at ``r_i = R (xi + (a/pi) sin(pi xi))`` with
    ``xi = (i + 1/2) / (n_r + 1/2)``; ring ``n_r`` is the wall.  The map is odd
    in ``xi``, so the mirror ring ``r_{-1} = -r_0`` is the ring ``r_0`` seen
    across the axis and the innermost cell face lies exactly on r = 0.  The
    stretch ``a`` in [0, 1) clusters rings toward the wall.
    """

    R: float
    n_r: int
    n_theta: int
    stretch: float = 0.3

    kind = "polar"

    def __post_init__(self):
        if not (self.R > 0 and math.isfinite(self.R)):
            raise ValueError(f"radius must be positive, got {self.R}")
        if self.n_r < 8:
            raise ValueError(f"n_r must be >= 8, got {self.n_r}")
        if self.n_theta < 16 or self.n_theta % 2:
            raise ValueError(f"n_theta must be even and >= 16, got {self.n_theta}")
        if not 0.0 <= self.stretch < 1.0:
            raise ValueError(f"stretch must lie in [0, 1), got {self.stretch}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_r + 1, self.n_theta)

    @property
    def dtheta(self) -> float:
        return 2.0 * math.pi / self.n_theta

    def map_radius(self, xi):
        xi = np.asarray(xi, dtype=float)
        return self.R * (xi + self.stretch / math.pi * np.sin(math.pi * xi))

    def inverse_map(self, r) -> np.ndarray:
        """Fractional ring index of radius values (ring i has index i)."""
        r = np.clip(np.asarray(r, dtype=float), 0.0, self.R)
        a = self.stretch
        xi = optimize.newton(
            lambda s: s + a / math.pi * np.sin(math.pi * s) - r / self.R,
            r / self.R,
            fprime=lambda s: 1.0 + a * np.cos(math.pi * s),
            tol=1e-14,
            maxiter=50,
        )
        return np.asarray(xi) * (self.n_r + 0.5) - 0.5

    @cached_property
    def r(self) -> np.ndarray:
        xi = (np.arange(self.n_r + 1) + 0.5) / (self.n_r + 0.5)
        return self.map_radius(xi)

    @cached_property
    def r_faces(self) -> np.ndarray:
        """Radii of the cell faces r_{i-1/2}, i = 0 .. n_r (first is 0)."""
        faces = np.empty(self.n_r + 1)
        faces[0] = 0.0
        faces[1:] = 0.5 * (self.r[:-1] + self.r[1:])
        return faces

    @cached_property
    def theta(self) -> np.ndarray:
        return np.arange(self.n_theta) * self.dtheta

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        rr, tt = np.meshgrid(self.r, self.theta, indexing="ij")
        return rr * np.cos(tt), rr * np.sin(tt)

    @cached_property
    def radius(self) -> np.ndarray:
        return np.broadcast_to(self.r[:, None], self.shape)

    @cached_property
    def ring_areas(self) -> np.ndarray:
        """Area of each ring's control volume divided by the angular cell width.

        Ring ``n_r`` is the half cell between the last face and the wall.
        """
        outer = np.append(self.r_faces[1:], self.R)
        return 0.5 * (outer**2 - self.r_faces**2)

    @cached_property
    def weights(self) -> np.ndarray:
        return np.broadcast_to((self.ring_areas * self.dtheta)[:, None], self.shape)

    def region_mask(self, region: "AnnulusRegion | None") -> np.ndarray:
        if region is None:
            return np.ones(self.shape, dtype=bool)
        return region.contains(self.radius)


Grid = Union[GridSpec2D, PolarGrid2D]


def _frozen_copy(values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScalarField2D:
    """Real samples of a scalar at the nodes of a grid."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _frozen_copy(self.values)
        if arr.shape != self.grid.shape:
            raise ValueError(f"value shape {arr.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", arr)

    def __add__(self, other: "ScalarField2D") -> "ScalarField2D":
        return ScalarField2D(self.grid, self.values + other.values)

    def __sub__(self, other: "ScalarField2D") -> "ScalarField2D":
        return ScalarField2D(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "ScalarField2D":
        return ScalarField2D(self.grid, c * self.values)

    __rmul__ = __mul__

    def integral(self) -> float:
        return float(np.sum(self.values * self.grid.weights))


@dataclass(frozen=True)
class VectorField2D:
    """Cartesian components ``values[0]``, ``values[1]`` at the grid nodes."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _frozen_copy(self.values)
        if arr.shape != (2,) + self.grid.shape:
            raise ValueError(f"value shape {arr.shape} does not match grid {(2,) + self.grid.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", arr)

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField2D":
        return cls(grid, np.zeros((2,) + grid.shape))

    def __add__(self, other: "VectorField2D") -> "VectorField2D":
        return VectorField2D(self.grid, self.values + other.values)

    def __sub__(self, other: "VectorField2D") -> "VectorField2D":
        return VectorField2D(self.grid, self.values - other.values)

    def __mul__(self, c: float) -> "VectorField2D":
        return VectorField2D(self.grid, c * self.values)

    __rmul__ = __mul__

    def magnitude(self) -> ScalarField2D:
        return ScalarField2D(self.grid, np.hypot(self.values[0], self.values[1]))


@dataclass(frozen=True)
class AnnulusRegion:
    """Closed annulus r_inner <= |x| <= r_outer; r_outer may be infinite."""

    r_inner: float = 0.0
    r_outer: float = math.inf

    def __post_init__(self):
        if not (0.0 <= self.r_inner < self.r_outer):
            raise ValueError(f"need 0 <= r_inner < r_outer, got {self.r_inner}, {self.r_outer}")

    def contains(self, r: np.ndarray) -> np.ndarray:
        return (r >= self.r_inner) & (r <= self.r_outer)


def _masked(grid: Grid, region: AnnulusRegion | None) -> np.ndarray:
    mask = grid.region_mask(region)
    if not mask.any():
        raise EmptyRegionError("empty region")
    return mask


def norm_lp(f: ScalarField2D, p: float = 2.0, region: AnnulusRegion | None = None) -> float:
    """Midpoint-rule L^p norm of a scalar field over a region.

    Parameters
    ----------
    f : ScalarField2D
    p : float
        Exponent in [1, inf]; ``math.inf`` gives the maximum of |f| over the
        region's nodes.
    region : AnnulusRegion, optional
        Node-centre membership test; the whole grid when omitted.
    """
    if not (p >= 1.0):
        raise ValueError(f"p must lie in [1, inf], got {p}")
    mask = _masked(f.grid, region)
    vals = np.abs(f.values[mask])
    if math.isinf(p):
        return float(vals.max())
    w = f.grid.weights[mask]
    if p == 1.0:
        return float(np.sum(vals * w))
    if p == 2.0:
        return float(math.sqrt(np.sum(vals * vals * w)))
    # scale first so large exponents do not overflow
    top = vals.max()
    if top == 0.0:
        return 0.0
    return float(top * np.sum((vals / top) ** p * w) ** (1.0 / p))


def gradient(f: ScalarField2D) -> tuple[np.ndarray, np.ndarray]:
    """Second-order Cartesian partial derivatives (d/dx, d/dy) at the nodes.

    Cartesian grids use centred differences with one-sided second-order
    stencils at the edges.  Polar grids difference in (r, theta) and rotate;
    the ring across the axis supplies the inner radial neighbour.
    """
    grid = f.grid
    v = f.values
    if isinstance(grid, GridSpec2D):
        return (np.gradient(v, grid.h, axis=0, edge_order=2),
                np.gradient(v, grid.h, axis=1, edge_order=2))
    fr = _polar_dr(v, grid)
    ft = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2.0 * grid.dtheta)
    c = np.cos(grid.theta)[None, :]
    s = np.sin(grid.theta)[None, :]
    rinv = 1.0 / grid.r[:, None]
    return c * fr - s * rinv * ft, s * fr + c * rinv * ft


def _polar_dr(v: np.ndarray, grid: PolarGrid2D) -> np.ndarray:
    r = grid.r
    mirror = np.roll(v[0], grid.n_theta // 2)
    ext = np.vstack([mirror[None, :], v])
    rext = np.concatenate([[-r[0]], r])
    out = np.empty_like(v)
    h1 = (rext[1:-1] - rext[:-2])[:, None]
    h2 = (rext[2:] - rext[1:-1])[:, None]
    out[:-1] = (-h2 / (h1 * (h1 + h2)) * ext[:-2]
                + (h2 - h1) / (h1 * h2) * ext[1:-1]
                + h1 / (h2 * (h1 + h2)) * ext[2:])
    # one-sided at the wall through rings n_r, n_r - 1, n_r - 2
    a = r[-1] - r[-2]
    b = r[-1] - r[-3]
    out[-1] = ((a + b) / (a * b) * v[-1] - b / (a * (b - a)) * v[-2]
               + a / (b * (b - a)) * v[-3])
    return out


def velocity_gradient(u: VectorField2D) -> np.ndarray:
    """Array ``G[i, j] = d u_i / d x_j`` of shape (2, 2, ...)."""
    g0 = gradient(ScalarField2D(u.grid, u.values[0]))
    g1 = gradient(ScalarField2D(u.grid, u.values[1]))
    return np.array([[g0[0], g0[1]], [g1[0], g1[1]]])


def curl(u: VectorField2D) -> ScalarField2D:
    """Scalar vorticity d u_2/dx - d u_1/dy by second-order differences."""
    g = velocity_gradient(u)
    return ScalarField2D(u.grid, g[1, 0] - g[0, 1])


def divergence(u: VectorField2D) -> ScalarField2D:
    g = velocity_gradient(u)
    return ScalarField2D(u.grid, g[0, 0] + g[1, 1])


def h1_parts(v: VectorField2D, region: AnnulusRegion | None = None) -> tuple[float, float]:
    """L^2 norm of v and of its gradient (Frobenius) over a region."""
    mask = _masked(v.grid, region)
    w = v.grid.weights[mask]
    l2 = math.sqrt(np.sum((v.values[0][mask] ** 2 + v.values[1][mask] ** 2) * w))
    g = velocity_gradient(v)
    g2 = np.sum(g**2, axis=(0, 1))
    return float(l2), float(math.sqrt(np.sum(g2[mask] * w)))


def norm_h1(v: VectorField2D, region: AnnulusRegion | None = None) -> float:
    """L^2 norm of v plus L^2 norm of its gradient over the region.

    The two parts are added rather than combined in quadrature.
    """
    l2, grad = h1_parts(v, region)
    return l2 + grad


def sample_cartesian(values: np.ndarray, grid: GridSpec2D, x, y, order: int = 3) -> np.ndarray:
    """Spline interpolation of cell-centred samples at arbitrary points."""
    ix = (np.asarray(x) + grid.extent) / grid.h - 0.5
    iy = (np.asarray(y) + grid.extent) / grid.h - 0.5
    coords = np.array([ix.ravel(), iy.ravel()])
    out = ndimage.map_coordinates(values, coords, order=order, mode="nearest")
    return out.reshape(np.shape(ix))


_PAD = 4


def sample_polar(values: np.ndarray, grid: PolarGrid2D, x, y, order: int = 3) -> np.ndarray:
    """Spline interpolation of polar nodal samples at points inside the disk.

    Interpolation runs in (ring index, angle index) space.  Two mirror rings
    across the axis are taken from the opposite side of the disk and the
    angular direction is padded periodically.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    half = grid.n_theta // 2
    inner = np.roll(values[1::-1], half, axis=1)  # rings 1, 0 reflected
    ext = np.vstack([inner, values])
    ext = np.concatenate([ext[:, -_PAD:], ext, ext[:, :_PAD]], axis=1)
    r = np.hypot(x, y)
    ir = grid.inverse_map(r) + 2.0
    it = np.mod(np.arctan2(y, x), 2.0 * math.pi) / grid.dtheta + _PAD
    coords = np.array([np.ravel(ir), np.ravel(it)])
    out = ndimage.map_coordinates(ext, coords, order=order, mode="nearest")
    return out.reshape(np.shape(x))


def extend_by_zero(v: VectorField2D | ScalarField2D, target: GridSpec2D, order: int = 3):
    """Resample a disk field onto a Cartesian grid, zero outside the disk."""
    grid = v.grid
    if not isinstance(grid, PolarGrid2D):
        raise TypeError("extend_by_zero expects a field on a polar grid")
    if grid.R > target.extent:
        raise ValueError(f"disk radius {grid.R} exceeds target extent {target.extent}")
    x, y = target.mesh
    inside = target.radius <= grid.R
    comps = v.values if isinstance(v, VectorField2D) else v.values[None]
    out = np.zeros((comps.shape[0],) + target.shape)
    for k, comp in enumerate(comps):
        out[k][inside] = sample_polar(comp, grid, x[inside], y[inside], order=order)
    if isinstance(v, VectorField2D):
        return VectorField2D(target, out)
    return ScalarField2D(target, out[0])


def resample_to_polar(v: VectorField2D | ScalarField2D, target: PolarGrid2D, order: int = 3):
    """Interpolate a Cartesian field at the nodes of a polar grid."""
    grid = v.grid
    if not isinstance(grid, GridSpec2D):
        raise TypeError("resample_to_polar expects a field on a Cartesian grid")
    if target.R > grid.extent:
        raise ValueError(f"disk radius {target.R} exceeds grid extent {grid.extent}")
    x, y = target.mesh
    comps = v.values if isinstance(v, VectorField2D) else v.values[None]
    out = np.array([sample_cartesian(c, grid, x, y, order=order) for c in comps])
    if isinstance(v, VectorField2D):
        return VectorField2D(target, out)
    return ScalarField2D(target, out[0])
