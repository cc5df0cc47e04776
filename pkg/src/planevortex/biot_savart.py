"""Velocity and stream function from compactly supported vorticity.

All whole-plane inversions are discrete convolutions against sampled kernels,

    u(x_a) = sum_b K(x_a - x_b) omega_b h^2,   K(x) = x^perp / (2 pi |x|^2),
    psi(x_a) = sum_b G(x_a - x_b) omega_b h^2,  G(x) = log|x| / (2 pi),

evaluated exactly by FFT on a grid zero-padded to twice the size, so the
periodic wrap-around never couples distinct cells.  The sampled K is set to
zero at the origin (it is odd); the sampled G at the origin is replaced by its
cell average.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import fft

from .fields import GridSpec2D, ScalarField2D, VectorField2D

TWO_PI = 2.0 * math.pi

# mean of log|x| over the square [-a, a]^2 is log(a) + LOG_CELL_OFFSET
LOG_CELL_OFFSET = 0.5 * (math.log(2.0) - 3.0 + 0.5 * math.pi)


def _wrapped_offsets(n: int, size: int, shift: float = 0.0) -> np.ndarray:
    """Integer offsets (plus shift) at each index of a circular buffer."""
    idx = np.arange(size)
    return np.where(idx <= n, idx, idx - size).astype(float) + shift


@dataclass(frozen=True)
class BiotSavartPlan:
    """Precomputed kernel transforms for one Cartesian grid.

    Parameters
    ----------
    grid : GridSpec2D
    workers : int
        Thread count passed to the FFT backend.
    """

    grid: GridSpec2D
    workers: int = 1
    padded: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "padded", 2 * self.grid.n)

    def _transform(self, kernel: np.ndarray) -> np.ndarray:
        return fft.rfft2(kernel, workers=self.workers)

    @cached_property
    def velocity_kernels(self) -> tuple[np.ndarray, np.ndarray]:
        h, P = self.grid.h, self.padded
        d = _wrapped_offsets(self.grid.n - 1, P) * h
        dx, dy = np.meshgrid(d, d, indexing="ij")
        r2 = dx * dx + dy * dy
        r2[0, 0] = 1.0
        k1 = -dy / (TWO_PI * r2)
        k2 = dx / (TWO_PI * r2)
        k1[0, 0] = k2[0, 0] = 0.0
        return self._transform(k1), self._transform(k2)

    @cached_property
    def center_stream_kernel(self) -> np.ndarray:
        h, P = self.grid.h, self.padded
        d = _wrapped_offsets(self.grid.n - 1, P) * h
        dx, dy = np.meshgrid(d, d, indexing="ij")
        r2 = dx * dx + dy * dy
        r2[0, 0] = 1.0
        g = np.log(r2) / (2.0 * TWO_PI)
        g[0, 0] = (math.log(0.5 * h) + LOG_CELL_OFFSET) / TWO_PI
        return self._transform(g)

    @cached_property
    def corner_stream_kernel(self) -> np.ndarray:
        # corner c minus cell i ranges over -(n-1)..n; offset is (c - i - 1/2) h
        h, P = self.grid.h, self.padded
        d = _wrapped_offsets(self.grid.n, P, shift=-0.5) * h
        dx, dy = np.meshgrid(d, d, indexing="ij")
        return self._transform(np.log(dx * dx + dy * dy) / (2.0 * TWO_PI))

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Transform of the zero-padded array, reusable across kernels."""
        return fft.rfft2(values, s=(self.padded, self.padded), workers=self.workers)

    def inverse(self, spectrum: np.ndarray, size: int) -> np.ndarray:
        out = fft.irfft2(spectrum, s=(self.padded, self.padded), workers=self.workers)
        return out[:size, :size] * (self.grid.h * self.grid.h)

    def velocity_from_spectrum(self, spec: np.ndarray) -> np.ndarray:
        k1, k2 = self.velocity_kernels
        n = self.grid.n
        return np.array([self.inverse(spec * k1, n), self.inverse(spec * k2, n)])

    def velocity(self, omega: np.ndarray) -> np.ndarray:
        return self.velocity_from_spectrum(self.forward(omega))

    def stream(self, omega: np.ndarray) -> np.ndarray:
        """Stream function at cell centres."""
        return self.inverse(self.forward(omega) * self.center_stream_kernel, self.grid.n)

    def corner_stream(self, omega: np.ndarray) -> np.ndarray:
        """Stream function at the (n + 1)^2 cell corners."""
        return self.inverse(self.forward(omega) * self.corner_stream_kernel, self.grid.n + 1)


_PLANS: dict = {}


def get_plan(grid: GridSpec2D, workers: int = 1) -> BiotSavartPlan:
    """Shared plan per grid; plans are read-only after construction."""
    key = (grid, workers)
    plan = _PLANS.get(key)
    if plan is None:
        plan = _PLANS[key] = BiotSavartPlan(grid, workers)
    return plan


def guard_band_excess(omega: np.ndarray, grid: GridSpec2D, frac: float = 0.9) -> float:
    """max |omega| beyond frac * extent, relative to max |omega|."""
    top = float(np.max(np.abs(omega)))
    if top == 0.0:
        return 0.0
    x, y = grid.mesh
    band = np.maximum(np.abs(x), np.abs(y)) > frac * grid.extent
    return float(np.max(np.abs(omega[band]))) / top


def biot_savart(omega: ScalarField2D, plan: BiotSavartPlan | None = None, guard_tol: float = 1e-6) -> VectorField2D:
    """Velocity K * omega at the cell centres by padded FFT convolution."""
    grid = omega.grid
    if not isinstance(grid, GridSpec2D):
        raise TypeError("biot_savart needs a Cartesian grid")
    plan = plan or get_plan(grid)
    if guard_band_excess(omega.values, grid) > guard_tol:
        warnings.warn("vorticity reaches the guard band; far-field truncation is not negligible",
                      RuntimeWarning, stacklevel=2)
    return VectorField2D(grid, plan.velocity(omega.values))


def stream_function(omega: ScalarField2D, plan: BiotSavartPlan | None = None) -> ScalarField2D:
    """Free-space stream function G * omega at the cell centres."""
    plan = plan or get_plan(omega.grid)
    return ScalarField2D(omega.grid, plan.stream(omega.values))


ORACLE_MAX_N = 128


def biot_savart_direct(omega: ScalarField2D) -> VectorField2D:
    """Direct double-sum evaluation of K * omega, skipping the singular cell.

    Cost is O(n^4); grids are limited to n <= 128.
    """
    grid = omega.grid
    if grid.n > ORACLE_MAX_N:
        raise ValueError("oracle limited to small grids")
    x, y = (a.ravel() for a in grid.mesh)
    w = omega.values.ravel() * grid.h * grid.h
    src = np.nonzero(w)[0]
    xs, ys, ws = x[src], y[src], w[src]
    out = np.zeros((2, x.size))
    chunk = max(1, 2_000_000 // max(1, src.size))
    for start in range(0, x.size, chunk):
        dx = x[start:start + chunk, None] - xs[None, :]
        dy = y[start:start + chunk, None] - ys[None, :]
        r2 = dx * dx + dy * dy
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(r2 > 0.0, 1.0 / (TWO_PI * r2), 0.0)
        out[0, start:start + chunk] = -(dy * inv) @ ws
        out[1, start:start + chunk] = (dx * inv) @ ws
    return VectorField2D(grid, out.reshape((2,) + grid.shape))
