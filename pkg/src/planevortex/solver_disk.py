"""No-slip Navier-Stokes solver on the disk of radius R.

Vorticity-stream function formulation on a `PolarGrid2D`.  Ring n_r is the
wall, where psi = 0 (no penetration) and the wall vorticity follows from the
no-slip condition d psi / dr = 0 by a one-sided closure: fitting
psi = a s^2 + b s^3 (s = R - r) through the two innermost rings gives
omega_wall = 2 a.

The discrete Laplacian is finite-volume in r (the innermost control volume
closes on the axis, so no axis condition is needed) and second-order
differences in theta.  Each angular Fourier mode decouples into a
tridiagonal system; all modes are stacked into one sparse block-diagonal
matrix that is factorized once.

A step of length dt advects with the same limited third-order upwind flux
scheme as the plane solver (fluxes from corner-averaged psi, exactly
divergence free), applies the linear source exactly, and then diffuses by
backward Euler with the wall vorticity of the advected state as Dirichlet
data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .errors import TimestepUnderflowError
from .fields import (GridSpec2D, PolarGrid2D, ScalarField2D, VectorField2D, curl, gradient,
                     resample_to_polar)
from .solver_plane import MIN_DT, SolverConfig, _source, upwind_faces


@dataclass(frozen=True)
class DiskState:
    """Disk flow state; arrays have the wall as their last ring."""

    grid: PolarGrid2D
    omega: np.ndarray
    psi: np.ndarray
    t: float = 0.0

    @cached_property
    def velocity(self) -> VectorField2D:
        gx, gy = gradient(ScalarField2D(self.grid, self.psi))
        u = np.array([-gy, gx])
        u[:, -1] = 0.0  # no slip
        return VectorField2D(self.grid, u)

    @property
    def vorticity(self) -> ScalarField2D:
        return ScalarField2D(self.grid, self.omega)


@dataclass
class DiskTrajectory:
    times: list
    states: list
    cfg: SolverConfig | None = None

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    def __iter__(self):
        return iter(self.states)

    @property
    def final(self) -> DiskState:
        return self.states[-1]


class DiskOperator:
    """Grid-dependent pieces of the disk scheme (shared, read-only)."""

    def __init__(self, grid: PolarGrid2D):
        self.grid = grid
        g = grid
        n = g.n_r
        r = g.r
        outer = g.r_faces[1:]
        inner = g.r_faces[:-1]  # inner[0] = 0 closes ring 0 on the axis
        area = g.ring_areas[:n]
        self.area = area
        gap = np.diff(r)  # r_{i+1} - r_i, i = 0 .. n - 1
        self.upper = outer / gap / area
        self.lower = np.zeros(n)
        self.lower[1:] = inner[1:] / gap[:-1] / area[1:]
        self.angular = (outer - inner) / (r[:n] * area)
        k = np.arange(g.n_theta // 2 + 1)
        self.modes = k.size
        self.mode_symbol = (2.0 - 2.0 * np.cos(k * g.dtheta)) / g.dtheta**2
        self._diffusion: dict = {}

    def _block_matrix(self, scale: float, shift: float) -> sparse.csc_matrix:
        """shift * I + scale * L for every angular mode, with psi_wall = 0."""
        K = self.modes
        main = -(self.lower + self.upper)[None, :] - self.mode_symbol[:, None] * self.angular[None, :]
        lo = np.tile(np.append(self.lower[1:], 0.0), K)[:-1]
        up = np.tile(np.append(self.upper[:-1], 0.0), K)[:-1]
        return sparse.diags([shift + scale * main.ravel(), scale * lo, scale * up], [0, -1, 1],
                            format="csc")

    @cached_property
    def poisson_lu(self):
        return splu(self._block_matrix(1.0, 0.0))

    def diffusion_lu(self, tau: float):
        lu = self._diffusion.get(tau)
        if lu is None:
            if len(self._diffusion) > 8:
                self._diffusion.clear()
            lu = self._diffusion[tau] = splu(self._block_matrix(-tau, 1.0))
        return lu

    def _solve_modes(self, lu, rhs_hat: np.ndarray) -> np.ndarray:
        n, K = self.grid.n_r, self.modes
        b = np.stack([rhs_hat.real.T.ravel(), rhs_hat.imag.T.ravel()], axis=1)
        x = lu.solve(b)
        return (x[:, 0] + 1j * x[:, 1]).reshape(K, n).T

    def laplacian(self, psi: np.ndarray) -> np.ndarray:
        """Discrete Laplacian at the interior rings of a full (wall included) array."""
        n = self.grid.n_r
        inner = np.vstack([psi[:1], psi[: n - 1]])
        radial = (self.upper[:, None] * (psi[1:] - psi[:n])
                  - self.lower[:, None] * (psi[:n] - inner))
        ang = (np.roll(psi[:n], -1, axis=1) - 2.0 * psi[:n] + np.roll(psi[:n], 1, axis=1))
        return radial + self.angular[:, None] * ang / self.grid.dtheta**2

    def stream(self, omega_interior: np.ndarray) -> np.ndarray:
        """psi on all rings (wall value 0) from interior vorticity."""
        hat = np.fft.rfft(omega_interior, axis=1)
        psi_hat = self._solve_modes(self.poisson_lu, hat)
        psi = np.fft.irfft(psi_hat, n=self.grid.n_theta, axis=1)
        return np.vstack([psi, np.zeros((1, self.grid.n_theta))])

    def wall_vorticity(self, psi: np.ndarray) -> np.ndarray:
        r = self.grid.r
        s1 = r[-1] - r[-2]
        s2 = r[-1] - r[-3]
        p1, p2 = psi[-2], psi[-3]
        a = (p1 * s2**3 - p2 * s1**3) / (s1**2 * s2**2 * (s2 - s1))
        return 2.0 * a

    def full_state(self, omega_interior: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        psi = self.stream(omega_interior)
        return np.vstack([omega_interior, self.wall_vorticity(psi)[None]]), psi

    def fluxes(self, psi: np.ndarray):
        """Radial fluxes on the n_r + 1 inner faces and angular fluxes on the
        faces theta_{j - 1/2}, both per unit angle-free volume."""
        n = self.grid.n_r
        c = 0.25 * (psi[:-1] + psi[1:])
        c = c + np.roll(c, -1, axis=1)  # corner (r_{i+1/2}, theta_{j+1/2})
        axis = float(np.mean(psi[0]))
        fr = np.zeros((n + 1, self.grid.n_theta))
        fr[1:] = -(c - np.roll(c, 1, axis=1))
        below = np.vstack([np.full((1, self.grid.n_theta), axis), c[:-1]])
        ft = np.roll(c - below, 1, axis=1)
        return fr, ft

    def advection_rhs(self, omega: np.ndarray, psi: np.ndarray) -> np.ndarray:
        g = self.grid
        n, half = g.n_r, g.n_theta // 2
        fr, ft = self.fluxes(psi)
        wall = omega[n]
        mirror = np.roll(omega[2::-1], half, axis=1)
        Q = np.vstack([mirror, omega[:n], wall[None], wall[None], wall[None]])
        gr = fr * upwind_faces(Q, fr)
        q = omega[:n]
        Qt = np.concatenate([q[:, -3:], q, q[:, :3]], axis=1)
        ftx = np.concatenate([ft, ft[:, :1]], axis=1)
        gt = ftx * upwind_faces(Qt.T, ftx.T).T
        div = (gr[1:] - gr[:-1]) + (gt[:, 1:] - gt[:, :-1])
        return -div / (self.area[:, None] * g.dtheta)

    def cfl_dt(self, psi: np.ndarray, safety: float) -> float:
        fr, ft = self.fluxes(psi)
        total = (np.abs(fr[1:]) + np.abs(fr[:-1]) + np.abs(ft) + np.abs(np.roll(ft, -1, axis=1)))
        rate = float(np.max(total / (2.0 * self.area[:, None] * self.grid.dtheta)))
        return math.inf if rate == 0.0 else safety / rate

    def advect(self, omega: np.ndarray, psi: np.ndarray, dt: float) -> np.ndarray:
        n = self.grid.n_r

        def rhs(w, p):
            return self.advection_rhs(w, p)

        q0 = omega[:n]
        q1 = q0 + dt * rhs(omega, psi)
        w1, p1 = self.full_state(q1)
        q2 = 0.75 * q0 + 0.25 * (q1 + dt * rhs(w1, p1))
        w2, p2 = self.full_state(q2)
        return q0 / 3.0 + 2.0 / 3.0 * (q2 + dt * rhs(w2, p2))

    def diffuse(self, q: np.ndarray, wall: np.ndarray, tau: float) -> np.ndarray:
        """Backward Euler step of length tau (tau = nu dt) with Dirichlet wall data."""
        rhs = q.copy()
        rhs[-1] += tau * self.upper[-1] * wall
        hat = np.fft.rfft(rhs, axis=1)
        out = self._solve_modes(self.diffusion_lu(tau), hat)
        return np.fft.irfft(out, n=self.grid.n_theta, axis=1)


_OPERATORS: dict = {}


def get_disk_operator(grid: PolarGrid2D) -> DiskOperator:
    op = _OPERATORS.get(grid)
    if op is None:
        op = _OPERATORS[grid] = DiskOperator(grid)
    return op


def _extrapolated_wall(grid: PolarGrid2D, q: np.ndarray) -> np.ndarray:
    """Quadratic extrapolation of interior vorticity to the wall."""
    r = grid.r
    x0, x1, x2 = r[-2], r[-3], r[-4]
    X = r[-1]
    l0 = (X - x1) * (X - x2) / ((x0 - x1) * (x0 - x2))
    l1 = (X - x0) * (X - x2) / ((x1 - x0) * (x1 - x2))
    l2 = (X - x0) * (X - x1) / ((x2 - x0) * (x2 - x1))
    return l0 * q[-1] + l1 * q[-2] + l2 * q[-3]


def disk_state_from_stream(grid: PolarGrid2D, psi: np.ndarray, t: float = 0.0,
                           no_slip: bool = True) -> DiskState:
    """State whose vorticity is the discrete Laplacian of ``psi``.

    The (constant) wall value of psi is removed.  The wall vorticity comes
    from the no-slip closure, or, for data that slip along the wall, from
    extrapolation of the interior.
    """
    op = get_disk_operator(grid)
    psi = np.array(psi, dtype=float)
    psi = psi - float(np.mean(psi[-1]))
    psi[-1] = 0.0
    q = op.laplacian(psi)
    wall = op.wall_vorticity(psi) if no_slip else _extrapolated_wall(grid, q)
    return DiskState(grid, np.vstack([q, wall[None]]), psi, t)


def disk_state_from_vorticity(grid: PolarGrid2D, omega_interior: np.ndarray, t: float = 0.0) -> DiskState:
    omega, psi = get_disk_operator(grid).full_state(np.asarray(omega_interior, dtype=float)[: grid.n_r])
    return DiskState(grid, omega, psi, t)


def initial_disk_state(u0, grid: PolarGrid2D) -> DiskState:
    """Disk state from closed-form disk data, a polar velocity, or a polar vorticity.

    Anything with a ``stream(x, y)`` method (such as the output of
    `approx_project_data`) is sampled at the nodes and differentiated
    discretely, so the initial stream function is reproduced exactly by the
    Poisson solver.
    """
    if hasattr(u0, "stream"):
        x, y = grid.mesh
        return disk_state_from_stream(grid, u0.stream(x, y), no_slip=getattr(u0, "no_slip", True))
    if isinstance(u0, VectorField2D):
        if not isinstance(u0.grid, PolarGrid2D):
            raise TypeError("velocity must live on the polar grid")
        return disk_state_from_vorticity(grid, curl(u0).values)
    if isinstance(u0, ScalarField2D):
        return disk_state_from_vorticity(grid, u0.values)
    raise TypeError(f"cannot build a disk state from {type(u0).__name__}")


def _disk_forcing(cfg: SolverConfig, grid: PolarGrid2D) -> np.ndarray | None:
    src = cfg.forcing_vorticity
    if src is None and cfg.forcing is not None:
        src = curl(cfg.forcing)
    if src is None:
        return None
    if isinstance(src.grid, GridSpec2D):
        src = resample_to_polar(src, grid)
    return np.asarray(src.values)[: grid.n_r]


def _disk_step(op: DiskOperator, state: DiskState, dt: float, cfg: SolverConfig,
               forcing: np.ndarray | None) -> DiskState:
    dt_cfl = op.cfl_dt(state.psi, cfg.cfl_safety)
    if dt > dt_cfl:
        k = math.ceil(dt / dt_cfl)
        sub = dt / k
        if sub < MIN_DT:
            raise TimestepUnderflowError("timestep underflow")
        for _ in range(k):
            state = _disk_step(op, state, sub, cfg, forcing)
        return state
    q = op.advect(state.omega, state.psi, dt)
    q = _source(q, forcing, cfg.gamma, dt)
    wall = op.wall_vorticity(op.stream(q))
    q = op.diffuse(q, wall, cfg.nu * dt)
    omega, psi = op.full_state(q)
    return DiskState(state.grid, omega, psi, state.t + dt)


def solve_disk(u0, cfg: SolverConfig, sample_times, grid: PolarGrid2D | None = None) -> DiskTrajectory:
    """No-slip disk solve sampled at absolute times.

    ``u0`` is a `DiskState`, or data accepted by `initial_disk_state` (then
    ``grid`` is required).
    """
    if cfg.nu <= 0.0:
        raise ValueError("disk solver requires viscosity")
    state = u0 if isinstance(u0, DiskState) else initial_disk_state(u0, grid)
    times = [float(t) for t in sample_times]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("sample_times must be sorted")
    if times and (times[0] < state.t - 1e-12 or times[-1] > cfg.T + 1e-12):
        raise ValueError("sample_times must lie within [t0, T]")
    op = get_disk_operator(state.grid)
    forcing = _disk_forcing(cfg, state.grid)
    states = []
    for target in times:
        interval = target - state.t
        if interval > 1e-14:
            nsteps = max(1, math.ceil(interval / cfg.dt - 1e-9))
            dt = interval / nsteps
            for _ in range(nsteps):
                state = _disk_step(op, state, dt, cfg, forcing)
            state = DiskState(state.grid, state.omega, state.psi, target)
        states.append(state)
    return DiskTrajectory(times, states, cfg)


def disk_circulation(state: DiskState) -> float:
    """Quadrature of the vorticity over the disk, wall half cell included."""
    return float(np.sum(state.omega * state.grid.weights))


def disk_energy(state: DiskState) -> float:
    """Discrete kinetic energy (1/2) sum |grad psi|^2 = -(1/2) (psi, omega)."""
    n = state.grid.n_r
    return float(-0.5 * np.sum(state.psi[:n] * state.omega[:n] * state.grid.weights[:n]))


def zero_disk_state(grid: PolarGrid2D) -> DiskState:
    z = np.zeros(grid.shape)
    return DiskState(grid, z, z.copy(), 0.0)
