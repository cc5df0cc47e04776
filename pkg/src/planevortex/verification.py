"""Deterministic identity and limit checks on solver output.

Energy of the square-integrable part v = u - sigma_m is evaluated from
vorticity only: with psi_v the free-space stream function of omega_v (whose
discrete mass is exactly zero),

    ||v||^2 = -(psi_v, omega_v),   ||grad v||^2 = ||omega_v||^2,
    (grad sigma_m, grad v) = (omega_sigma, omega_v),   (f, v) = -(omega_f, psi_v).

The balance checked is

    ||v(t)||^2 + 2 nu int ||grad v||^2
        = ||v(0)||^2 - 2 nu int (grad sigma_m, grad v) - 2 int (v . grad sigma_m, v)
          + 2 int (f, v),

with trapezoid quadrature in time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .fields import AnnulusRegion, PolarGrid2D, VectorField2D, h1_parts, norm_lp, resample_to_polar
from .operators import approx_project_data
from .solver_disk import solve_disk
from .solver_plane import PlaneState, SolverConfig, Trajectory, solve
from .stationary import StationaryVortex, discrete_profile


def _vortex(state: PlaneState, vortex: StationaryVortex | None) -> PlaneState:
    if vortex is None or vortex is state.vortex:
        return state
    return PlaneState(state.omega, state.t, vortex)


def _zero_mass_forcing(cfg: SolverConfig | None, grid) -> np.ndarray | None:
    if cfg is None:
        return None
    wf = cfg.source_vorticity(grid)
    if wf is None:
        return None
    scale = float(np.sum(np.abs(wf)) * grid.h**2)
    if abs(float(np.sum(wf)) * grid.h**2) > 1e-12 * max(scale, 1.0):
        raise ValueError("energy balance needs forcing of zero circulation")
    return wf


@dataclass(frozen=True)
class EnergyTerms:
    """Instantaneous terms of the energy balance for one state."""

    t: float
    m: float
    energy: float
    dissipation: float
    sigma_grad: float
    sigma_strain: float
    forcing: float


def energy_terms(state: PlaneState, forcing_vorticity: np.ndarray | None = None) -> EnergyTerms:
    grid = state.grid
    w = grid.h * grid.h
    m, omega_v = state.remainder
    psi_v = state.remainder_stream
    v = state.remainder_velocity.values
    G = state.vortex.velocity_gradient(*grid.mesh)
    strain = np.einsum("i...,ij...,j...->...", v, G, v)
    profile = discrete_profile(state.vortex, grid)
    forcing = 0.0
    if forcing_vorticity is not None:
        forcing = float(-np.sum(forcing_vorticity * psi_v) * w)
    return EnergyTerms(
        t=state.t,
        m=m,
        energy=float(-np.sum(psi_v * omega_v) * w),
        dissipation=float(np.sum(omega_v * omega_v) * w),
        sigma_grad=float(m * np.sum(profile * omega_v) * w),
        sigma_strain=float(m * np.sum(strain) * w),
        forcing=forcing,
    )


@dataclass(frozen=True)
class EnergyBudget:
    times: np.ndarray
    nu: float
    energy: np.ndarray
    dissipation: np.ndarray
    sigma_grad: np.ndarray
    sigma_strain: np.ndarray
    forcing: np.ndarray
    m: np.ndarray

    def _cum(self, y: np.ndarray) -> np.ndarray:
        if len(self.times) < 2:
            return np.zeros_like(y)
        return cumulative_trapezoid(y, self.times, initial=0.0)

    @property
    def lhs(self) -> np.ndarray:
        return self.energy + 2.0 * self.nu * self._cum(self.dissipation)

    @property
    def rhs(self) -> np.ndarray:
        return (self.energy[0] - 2.0 * self.nu * self._cum(self.sigma_grad)
                - 2.0 * self._cum(self.sigma_strain) + 2.0 * self._cum(self.forcing))

    @property
    def residual(self) -> np.ndarray:
        return np.abs(self.lhs - self.rhs)


def energy_budget(traj: Trajectory, vortex: StationaryVortex | None = None,
                  cfg: SolverConfig | None = None) -> EnergyBudget:
    """Energy-balance terms at every sample of a plane trajectory.

    Requires no damping and forcing without circulation, so that m is
    constant in time.
    """
    cfg = cfg or traj.cfg
    if cfg is not None and cfg.gamma > 0.0:
        raise ValueError("energy balance needs gamma = 0")
    states = [_vortex(s, vortex) for s in traj.states]
    wf = _zero_mass_forcing(cfg, states[0].grid)
    terms = [energy_terms(s, wf) for s in states]

    def col(name):
        return np.array([getattr(t, name) for t in terms])

    return EnergyBudget(np.array([s.t for s in states]), cfg.nu if cfg else 0.0,
                        col("energy"), col("dissipation"), col("sigma_grad"),
                        col("sigma_strain"), col("forcing"), col("m"))


def energy_equality_residual(traj: Trajectory, vortex: StationaryVortex | None = None,
                             cfg: SolverConfig | None = None) -> float:
    """|LHS - RHS| of the energy balance at the final sample."""
    return float(energy_budget(traj, vortex, cfg).residual[-1])


# --- Gronwall bound --------------------------------------------------------------

def sigma1_gradient_norms(vortex: StationaryVortex, grid) -> tuple[float, float]:
    """(sup, L^2) norms of the Frobenius norm of grad sigma_1.

    The L^2 norm is measured on the grid and completed with the exact tail
    outside the inscribed disk, where |grad sigma_1|^2 = 2 / (2 pi r^2)^2.
    """
    x, y = grid.mesh
    G = vortex.velocity_gradient(x, y)
    frob2 = np.sum(G**2, axis=(0, 1))
    L = grid.extent
    inside = grid.radius <= L
    l2sq = float(np.sum(frob2[inside]) * grid.h**2) + 1.0 / (2.0 * math.pi * L * L)
    return float(np.sqrt(frob2.max())), math.sqrt(l2sq)


@dataclass(frozen=True)
class GronwallReport:
    times: np.ndarray
    lhs: np.ndarray
    bound: np.ndarray
    C: float
    margin: float
    ok: bool


def gronwall_bound_check(traj: Trajectory, vortex: StationaryVortex | None = None,
                         cfg: SolverConfig | None = None) -> GronwallReport:
    """Check ||v||^2 + nu int ||grad v||^2 <= (||v0||^2 + C m^2 nu t + int ||f||^2) e^{(C|m| + 1) t}.

    C = max(2 ||grad sigma_1||_inf, ||grad sigma_1||_2^2) bounds both sigma
    interaction terms.
    """
    cfg = cfg or traj.cfg
    budget = energy_budget(traj, vortex, cfg)
    state0 = _vortex(traj.states[0], vortex)
    sup, l2 = sigma1_gradient_norms(state0.vortex, state0.grid)
    C = max(2.0 * sup, l2 * l2)
    nu = budget.nu
    t = budget.times - budget.times[0]
    m = abs(budget.m[0])
    fsq = 0.0
    wf = _zero_mass_forcing(cfg, state0.grid)
    if wf is not None:
        psi_f = state0.plan.stream(wf)
        fsq = float(-np.sum(psi_f * wf) * state0.grid.h**2)
    lhs = budget.energy + nu * budget._cum(budget.dissipation)
    bound = (budget.energy[0] + C * m * m * nu * t + fsq * t) * np.exp((C * m + 1.0) * t)
    # both sides coincide at t = 0, so the margin is taken over later samples
    later = t > 0.0
    margin = float(np.min((bound - lhs)[later])) if later.any() else 0.0
    start_ok = lhs[0] - bound[0] <= 1e-12 * max(1.0, abs(bound[0]))
    return GronwallReport(budget.times, lhs, bound, C, margin, bool(margin >= 0.0 and start_ok))


# --- tails -----------------------------------------------------------------------

@dataclass(frozen=True)
class TailRow:
    t: float
    R: float
    l2: float
    h1: float


def tail_decay(traj: Trajectory, vortex: StationaryVortex | None, R_list) -> list[TailRow]:
    """Norms of u - sigma_m over the exterior regions |x| >= R."""
    rows = []
    for state in traj.states:
        s = _vortex(state, vortex)
        v = s.remainder_velocity
        for R in R_list:
            l2, grad = h1_parts(v, AnnulusRegion(float(R), math.inf))
            rows.append(TailRow(s.t, float(R), l2, l2 + grad))
    return rows


# --- expanding domain --------------------------------------------------------------

@dataclass(frozen=True)
class ExpandingRow:
    R: float
    sup_h1: float
    grad_l2: float
    corollary_sup: float
    n_r: int
    n_theta: int


def _polar_h1(a: np.ndarray, grid: PolarGrid2D) -> tuple[float, float]:
    l2, grad = h1_parts(VectorField2D(grid, a))
    return l2, grad


def disk_grid_for(R: float, resolution: float, n_theta: int, stretch: float = 0.3) -> PolarGrid2D:
    """Polar grid with about ``resolution`` rings per unit radius."""
    return PolarGrid2D(float(R), max(8, int(round(resolution * R))), n_theta, stretch)


def expanding_domain_study(u0: PlaneState, cfg: SolverConfig, R_list, vortex: StationaryVortex | None = None,
                           resolution: float = 16.0, n_theta: int = 128, samples: int = 6,
                           disk_dt: float | None = None, plane_traj: Trajectory | None = None
                           ) -> list[ExpandingRow]:
    """Disk solutions from U_R u0 against the whole-plane solution.

    For each R: the sup over sample times of the H^1(disk) difference, the
    time-L^2 norm of the gradient difference, and the sup of the difference
    to U_R applied to the plane solution at each time.  Plane fields are
    interpolated to the polar nodes; all gradients are polar differences.
    """
    if cfg.nu <= 0.0:
        raise ValueError("expanding-domain study needs nu > 0")
    u0 = _vortex(u0, vortex)
    times = np.linspace(u0.t, cfg.T, samples)
    if plane_traj is None:
        plane_traj = solve(u0, cfg, times)
    disk_cfg = replace(cfg, dt=disk_dt or cfg.dt)
    rows = []
    for R in R_list:
        grid = disk_grid_for(R, resolution, n_theta)
        data0 = approx_project_data(u0.velocity, u0.vortex, R, vorticity=u0.omega)
        disk = solve_disk(data0, disk_cfg, times, grid=grid)
        x, y = grid.mesh
        h1s, grads, cors = [], [], []
        for ps, ds in zip(plane_traj.states, disk.states):
            up = resample_to_polar(ps.velocity, grid).values
            l2, g = _polar_h1(ds.velocity.values - up, grid)
            h1s.append(l2 + g)
            grads.append(g)
            proj = approx_project_data(ps.velocity, ps.vortex, R, vorticity=ps.omega).velocity(x, y)
            l2c, gc = _polar_h1(ds.velocity.values - proj, grid)
            cors.append(l2c + gc)
        grad_l2 = math.sqrt(float(np.trapezoid(np.square(grads), times))) if len(times) > 1 else grads[0]
        rows.append(ExpandingRow(float(R), max(h1s), grad_l2, max(cors), grid.n_r, grid.n_theta))
    return rows


# --- vanishing viscosity -------------------------------------------------------------

def rho_envelope(nu: float, T: float, C: float) -> float:
    """(C nu T)^{e^{-C T} / 2}."""
    return (C * nu * T) ** (0.5 * math.exp(-C * T))


def envelope_constant(omega0) -> float:
    """C = ||omega0||_{L^1} + ||omega0||_{L^inf}, fixed once from the data."""
    return norm_lp(omega0, 1.0) + norm_lp(omega0, math.inf)


def l2_difference(a: PlaneState, b: PlaneState) -> float:
    """L^2 distance of two velocities with equal circulation, from vorticities."""
    dw = np.asarray(a.omega.values) - np.asarray(b.omega.values)
    psi = a.plan.stream(dw)
    return math.sqrt(max(0.0, float(-np.sum(psi * dw) * a.grid.h**2)))


@dataclass(frozen=True)
class ViscosityRow:
    nu: float
    sup_w: float
    rho: float


@dataclass(frozen=True)
class ViscosityReport:
    rows: list
    slope: float
    C: float

    @property
    def below_envelope(self) -> bool:
        return all(r.sup_w <= r.rho for r in self.rows if r.nu > 0)

    @property
    def decreasing(self) -> bool:
        vals = [r.sup_w for r in self.rows if r.nu > 0]
        return all(b < a for a, b in zip(vals, vals[1:]))


def loglog_slope(x, y) -> float:
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


def vanishing_viscosity_study(u0: PlaneState, nus, cfg: SolverConfig, samples: int = 6,
                              euler_traj: Trajectory | None = None) -> ViscosityReport:
    """sup_t ||u^nu(t) - u^0(t)||_{L^2} along a viscosity ladder, with fitted slope."""
    times = np.linspace(u0.t, cfg.T, samples)
    if euler_traj is None:
        euler_traj = solve(u0, replace(cfg, nu=0.0), times)
    C = envelope_constant(u0.omega)
    rows = []
    for nu in nus:
        traj = solve(u0, replace(cfg, nu=float(nu)), times)
        sup_w = max(l2_difference(a, b) for a, b in zip(traj.states, euler_traj.states))
        rho = rho_envelope(nu, cfg.T - u0.t, C) if nu > 0 else 0.0
        rows.append(ViscosityRow(float(nu), sup_w, rho))
    pos = [r for r in rows if r.nu > 0]
    slope = loglog_slope([r.nu for r in pos], [r.sup_w for r in pos]) if len(pos) > 1 else math.nan
    return ViscosityReport(rows, slope, C)


# --- damped circulation ----------------------------------------------------------------

def damped_circulation_exact(m0: float, gamma: float, eta: float, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if gamma == 0.0:
        return m0 + eta * t
    return eta / gamma + (m0 - eta / gamma) * np.exp(-gamma * t)


def damped_circulation_check(traj: Trajectory, gamma: float | None = None, eta: float | None = None) -> float:
    """Largest deviation of the measured circulation from the exact exponential law."""
    cfg = traj.cfg
    gamma = cfg.gamma if gamma is None else gamma
    state0 = traj.states[0]
    if eta is None:
        wf = cfg.source_vorticity(state0.grid) if cfg is not None else None
        eta = 0.0 if wf is None else float(np.sum(wf) * state0.grid.h**2)
    t0 = state0.t
    m = np.array([s.circulation for s in traj.states])
    exact = damped_circulation_exact(m[0], gamma, eta, np.array([s.t for s in traj.states]) - t0)
    return float(np.max(np.abs(m - exact)))
