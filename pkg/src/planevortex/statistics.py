"""Finitely supported statistical solutions and their integral identities.

An `Ensemble` is a weighted list of plane states; the pushforward advances
every member with the deterministic solver.  Test functionals are
cylindrical, Phi(u) = phi((u, g_1), ..., (u, g_k)), with each g_j = grad^perp
chi_j for a compactly supported bump chi_j, so g_j is divergence free and all
its derivatives are known in closed form.

For such g the time derivative of (u, g) needs no pressure and no velocity
gradients:

    (u . grad u, g) = (omega u^perp, g),     nu (grad u, grad g) = nu (omega, curl g),
    (f, g) = -(omega_f, chi),

with u^perp = (-u_2, u_1).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import EnsembleMemberError
from .fields import GridSpec2D, ScalarField2D, VectorField2D, extend_by_zero, norm_lp
from .operators import approx_project_data
from .solver_disk import DiskState, solve_disk
from .solver_plane import PlaneState, SolverConfig, Trajectory, solve
from .verification import disk_grid_for, energy_budget


# --- test fields and functionals ---------------------------------------------------

@dataclass(frozen=True)
class CompactTestField:
    """g = grad^perp chi with chi = amplitude (1 - rho^2)^4, rho = |x - center| / radius."""

    center: tuple = (0.0, 0.0)
    radius: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def support_radius(self) -> float:
        """Radius of the smallest origin-centred disk containing the support."""
        return math.hypot(*self.center) + self.radius

    def _rho(self, x, y):
        dx = np.asarray(x, dtype=float) - self.center[0]
        dy = np.asarray(y, dtype=float) - self.center[1]
        return dx, dy, (dx * dx + dy * dy) / self.radius**2

    def stream(self, x, y) -> np.ndarray:
        _, _, r2 = self._rho(x, y)
        return self.amplitude * np.where(r2 < 1.0, (1.0 - r2) ** 4, 0.0)

    def velocity(self, x, y) -> np.ndarray:
        dx, dy, r2 = self._rho(x, y)
        # d chi / dx_i = -8 A (1 - rho^2)^3 (x_i - c_i) / a^2
        f = np.where(r2 < 1.0, -8.0 * self.amplitude * (1.0 - r2) ** 3 / self.radius**2, 0.0)
        return np.array([-f * dy, f * dx])

    def curl(self, x, y) -> np.ndarray:
        """Laplacian of chi, which is the vorticity of g."""
        _, _, r2 = self._rho(x, y)
        return np.where(r2 < 1.0, self.amplitude * (1.0 - r2) ** 2 * (64.0 * r2 - 16.0)
                        / self.radius**2, 0.0)

    def on(self, grid) -> VectorField2D:
        return VectorField2D(grid, self.velocity(*grid.mesh))


@dataclass(frozen=True)
class AffinePhi:
    """phi(x) = c . x + b."""

    coef: tuple
    offset: float = 0.0

    def __call__(self, x):
        return float(np.dot(self.coef, x) + self.offset)

    def grad(self, x):
        return np.asarray(self.coef, dtype=float)

    def grad_bound(self):
        return float(np.linalg.norm(self.coef))


@dataclass(frozen=True)
class ConstantPhi:
    value: float = 1.0
    k: int = 1

    def __call__(self, x):
        return float(self.value)

    def grad(self, x):
        return np.zeros(len(x))

    def grad_bound(self):
        return 0.0


@dataclass(frozen=True)
class SquarePhi:
    """phi(x) = sum_j c_j x_j^2 (unbounded gradient; for checks only)."""

    coef: tuple

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return float(np.dot(self.coef, x * x))

    def grad(self, x):
        return 2.0 * np.asarray(self.coef, dtype=float) * np.asarray(x, dtype=float)

    def grad_bound(self):
        return None


@dataclass(frozen=True)
class SaturatedPhi:
    """phi(x) = sum_j c_j x_j^2 / (s^2 + x_j^2), bounded with bounded gradient."""

    coef: tuple
    scale: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        s2 = self.scale**2
        return float(np.dot(self.coef, x * x / (s2 + x * x)))

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        s2 = self.scale**2
        return np.asarray(self.coef, dtype=float) * 2.0 * s2 * x / (s2 + x * x) ** 2

    def grad_bound(self):
        # 2 s^2 x / (s^2 + x^2)^2 peaks at x = s / sqrt(3)
        return float(np.linalg.norm(self.coef)) * 9.0 / (8.0 * math.sqrt(3.0) * self.scale)


@dataclass(frozen=True)
class IndicatorPhi:
    """Smooth indicator prod_j 1 / (1 + exp(-(x_j - a_j) / w))."""

    threshold: tuple
    width: float = 0.1

    def _parts(self, x):
        z = (np.asarray(x, dtype=float) - np.asarray(self.threshold, dtype=float)) / self.width
        return 0.5 * (1.0 + np.tanh(0.5 * z))

    def __call__(self, x):
        return float(np.prod(self._parts(x)))

    def grad(self, x):
        s = self._parts(x)
        ds = s * (1.0 - s) / self.width
        out = np.empty_like(s)
        for j in range(s.size):
            out[j] = ds[j] * np.prod(np.delete(s, j))
        return out

    def grad_bound(self):
        return math.sqrt(len(self.threshold)) / (4.0 * self.width)


@dataclass(frozen=True)
class TestFunctional:
    """Phi(u) = phi((u, g_1), ..., (u, g_k))."""

    __test__ = False  # not a pytest class

    phi: Callable
    fields: tuple

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        if not self.fields:
            raise ValueError("need at least one test field")

    @property
    def k(self) -> int:
        return len(self.fields)

    @property
    def support_radius(self) -> float:
        return max(g.support_radius for g in self.fields)

    def check_grid(self, grid):
        limit = grid.extent / 2.0 if isinstance(grid, GridSpec2D) else grid.R
        if self.support_radius > limit:
            raise ValueError("test field support leaves the admissible region of the grid")

    def coordinates(self, u) -> np.ndarray:
        return inner_products(u, self.fields)

    def __call__(self, u) -> float:
        return float(self.phi(self.coordinates(u)))


def _grid_of(u):
    if isinstance(u, (PlaneState, DiskState, VectorField2D)):
        return u.grid
    raise TypeError(f"cannot take inner products with {type(u).__name__}")


def _gauge_free_curl(f: CompactTestField, x, y, w) -> np.ndarray:
    """curl g with its discrete mean over the support removed, so constants in psi pair to zero."""
    k = f.curl(x, y)
    supp = f.stream(x, y) > 0.0
    k[supp] -= np.sum(k * w) / np.sum(w[supp])
    return k


def inner_products(u, fields: Sequence[CompactTestField]) -> np.ndarray:
    """Quadrature of (u, g_j) on the grid of u.

    Solver states pair without differentiating their stream function, using
    identities exact for compactly supported chi: plane states through
    (u, g) = -(omega, chi), disk states through (u, g) = -(psi, curl g),
    whose integrand stays smooth where the polar rings are coarse.  A bare
    velocity field is paired directly.
    """
    grid = _grid_of(u)
    x, y = grid.mesh
    w = grid.weights
    if isinstance(u, PlaneState):
        om = np.asarray(u.omega.values)
        return np.array([-float(np.sum(om * f.stream(x, y) * w)) for f in fields])
    if isinstance(u, DiskState):
        return np.array([-float(np.sum(u.psi * _gauge_free_curl(f, x, y, w) * w)) for f in fields])
    vel = u.values
    return np.array([float(np.sum((vel[0] * g[0] + vel[1] * g[1]) * w))
                     for g in (f.velocity(x, y) for f in fields)])


def eval_functional(Phi: TestFunctional, u) -> float:
    grid = _grid_of(u)
    Phi.check_grid(grid)
    return Phi(u)


def functional_gradient(Phi: TestFunctional, u) -> VectorField2D:
    """Phi'(u) = sum_j d_j phi(...) g_j on the grid of u."""
    grid = _grid_of(u)
    coef = np.asarray(Phi.phi.grad(Phi.coordinates(u)), dtype=float)
    x, y = grid.mesh
    out = np.zeros((2,) + grid.shape)
    for c, g in zip(coef, Phi.fields):
        out += c * g.velocity(x, y)
    return VectorField2D(grid, out)


def shipped_test_fields() -> tuple[CompactTestField, CompactTestField]:
    """Two test fields supported in the disk of radius 2."""
    return (CompactTestField((1.2, 0.0), 0.8, 1.0), CompactTestField((-0.6, 0.9), 0.9, 1.0))


def shipped_family(fields=None) -> dict[str, TestFunctional]:
    """Affine, saturated-quadratic and smooth-indicator functionals on the same fields."""
    fields = tuple(fields or shipped_test_fields())
    return {
        "affine": TestFunctional(AffinePhi((1.0, 0.5)), fields),
        "saturated": TestFunctional(SaturatedPhi((1.0, 1.0), 0.3), fields),
        "indicator": TestFunctional(IndicatorPhi((0.0, 0.0), 0.2), fields),
    }


# --- ensembles ------------------------------------------------------------------------

@dataclass(frozen=True)
class Ensemble:
    """Finitely supported probability measure on plane states."""

    weights: tuple
    states: tuple
    t: float = 0.0

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", tuple(self.states))
        if len(w) != len(self.states) or not w:
            raise ValueError("need one positive weight per member")
        if any(x <= 0 for x in w):
            raise ValueError("weights must be positive")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError("weights must sum to one")
        grids = {s.grid for s in self.states}
        if len(grids) > 1:
            raise ValueError("members must share a grid")

    @classmethod
    def uniform(cls, states, t: float | None = None) -> "Ensemble":
        states = tuple(states)
        t = states[0].t if t is None else t
        return cls(tuple([1.0 / len(states)] * len(states)), states, t)

    @property
    def grid(self):
        return self.states[0].grid

    def __len__(self):
        return len(self.states)

    def mean(self, observable: Callable) -> float:
        """Weighted mean in fixed member order."""
        return math.fsum(w * float(observable(s)) for w, s in zip(self.weights, self.states))


def _solve_members(mu0: Ensemble, cfg: SolverConfig, times, workers: int = 1) -> list[Trajectory]:
    times = [float(t) for t in times]
    if times and times[-1] > cfg.T:
        cfg = replace(cfg, T=times[-1])

    def run(item):
        i, s = item
        try:
            return solve(s, cfg, times)
        except Exception as exc:  # report which member failed
            raise EnsembleMemberError(i, exc) from exc

    items = list(enumerate(mu0.states))
    if workers <= 1:
        return [run(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, items))


def pushforward_paths(mu0: Ensemble, cfg: SolverConfig, times, workers: int = 1) -> list[Trajectory]:
    """Member trajectories sampled at ``times`` (absolute)."""
    return _solve_members(mu0, cfg, times, workers)


def pushforward(mu0: Ensemble, cfg: SolverConfig, t: float, workers: int = 1) -> Ensemble:
    """mu_t = S(t) mu0: every member advanced to time t, weights unchanged."""
    if t == mu0.t:
        return mu0
    paths = _solve_members(mu0, cfg, [t], workers)
    return Ensemble(mu0.weights, tuple(p.final for p in paths), t)


def sample_patch_ensemble(grid: GridSpec2D, size: int, seed: int, strength=(0.5, 1.5),
                          semi_axis=(0.4, 0.8), offset: float = 0.8, edge: float = 0.1,
                          signed: bool = False) -> Ensemble:
    """Uniformly weighted ensemble of smoothed elliptical patches with random shape and position."""
    from .flows import patch_vorticity
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(size):
        s = rng.uniform(*strength)
        if signed and rng.random() < 0.5:
            s = -s
        axes = tuple(rng.uniform(*semi_axis, size=2))
        center = tuple(rng.uniform(-offset, offset, size=2))
        angle = rng.uniform(0.0, math.pi)
        states.append(PlaneState(patch_vorticity(grid, s, axes, center, angle, edge=edge)))
    return Ensemble.uniform(states)


def sample_vortex_ensemble(grid: GridSpec2D, size: int, seed: int, circulation=(0.3, 1.0),
                           core=(0.4, 0.55), offset: float = 0.5, pairs: bool = True) -> Ensemble:
    """Uniformly weighted Gaussian vortices (or pairs) with random signed circulations.

    Each member gets an independent sign, so circulations differ across members.
    """
    from .flows import gaussian_vorticity
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(size):
        om = None
        for _ in range(2 if pairs else 1):
            m = rng.uniform(*circulation) * (1.0 if rng.random() < 0.5 else -1.0)
            a = rng.uniform(*core)
            c = tuple(rng.uniform(-offset, offset, size=2))
            g = gaussian_vorticity(grid, m, a, c)
            om = g if om is None else om + g
        states.append(PlaneState(om))
    return Ensemble.uniform(states)


# --- Liouville identity -------------------------------------------------------------

def flux_pairing(state: PlaneState, fields, cfg: SolverConfig) -> np.ndarray:
    """(F(u), g_j) = (f, g_j) - gamma (u, g_j) - nu (omega, curl g_j) - (omega u^perp, g_j)."""
    grid = state.grid
    x, y = grid.mesh
    w = grid.weights
    om = np.asarray(state.omega.values)
    u = state.velocity.values
    wf = cfg.source_vorticity(grid)
    out = []
    for f in fields:
        g = f.velocity(x, y)
        adv = np.sum(om * (-u[1] * g[0] + u[0] * g[1]) * w)
        visc = cfg.nu * np.sum(om * f.curl(x, y) * w)
        val = -adv - visc
        if cfg.gamma > 0.0:
            val -= cfg.gamma * np.sum((u[0] * g[0] + u[1] * g[1]) * w)
        if wf is not None:
            val -= np.sum(wf * f.stream(x, y) * w)
        out.append(float(val))
    return np.array(out)


@dataclass(frozen=True)
class LiouvilleReport:
    lhs: float
    rhs: float
    residual: float
    mean_t: float
    mean_0: float
    integral: float
    times: np.ndarray
    integrand: np.ndarray

    @property
    def relative(self) -> float:
        return self.residual / abs(self.mean_t) if self.mean_t != 0 else math.inf


def liouville_integrand(paths: list[Trajectory], weights, Phi: TestFunctional, cfg: SolverConfig) -> np.ndarray:
    """Ensemble mean of (F(s, u), Phi'(u)) at every sample time."""
    vals = []
    for i in range(len(paths[0].states)):
        acc = []
        for w, p in zip(weights, paths):
            s = p.states[i]
            grad = Phi.phi.grad(Phi.coordinates(s))
            acc.append(w * float(np.dot(grad, flux_pairing(s, Phi.fields, cfg))))
        vals.append(math.fsum(acc))
    return np.array(vals)


def liouville_report(mu0: Ensemble, Phi: TestFunctional, cfg: SolverConfig, t: float, quad_dt: float,
                     paths: list[Trajectory] | None = None, workers: int = 1) -> LiouvilleReport:
    """Both sides of int Phi d mu_t = int Phi d mu_0 + int_0^t int (F, Phi') d mu_s ds.

    The time integral is the trapezoid rule at spacing ``quad_dt``.  When
    ``paths`` are given, their sample times must contain that lattice.
    """
    nq = t / quad_dt
    if abs(nq - round(nq)) > 1e-9 or round(nq) < 1:
        raise ValueError("quad_dt must divide t")
    nq = int(round(nq))
    times = mu0.t + quad_dt * np.arange(nq + 1)
    if paths is None:
        paths = _solve_members(mu0, cfg, times, workers)
    else:
        paths = [_subsample(p, times) for p in paths]
    Phi.check_grid(mu0.grid)
    integrand = liouville_integrand(paths, mu0.weights, Phi, cfg)
    integral = float(np.trapezoid(integrand, times))
    mean_0 = math.fsum(w * Phi(p.states[0]) for w, p in zip(mu0.weights, paths))
    mean_t = math.fsum(w * Phi(p.states[-1]) for w, p in zip(mu0.weights, paths))
    lhs, rhs = mean_t, mean_0 + integral
    return LiouvilleReport(lhs, rhs, abs(lhs - rhs), mean_t, mean_0, integral, times, integrand)


def _subsample(traj: Trajectory, times) -> Trajectory:
    tt = np.asarray(traj.times)
    idx = []
    for t in times:
        j = int(np.argmin(np.abs(tt - t)))
        if abs(tt[j] - t) > 1e-9:
            raise ValueError(f"trajectory has no sample at t = {t}")
        idx.append(j)
    return Trajectory([traj.times[j] for j in idx], [traj.states[j] for j in idx], traj.cfg)


def liouville_residual(mu0: Ensemble, Phi: TestFunctional, cfg: SolverConfig, t: float, quad_dt: float,
                       paths: list[Trajectory] | None = None, workers: int = 1) -> float:
    return liouville_report(mu0, Phi, cfg, t, quad_dt, paths, workers).residual


@dataclass(frozen=True)
class QuadratureSplit:
    """Richardson separation of the time-quadrature error of the Liouville identity."""

    residual: float
    relative: float
    quad_error: float
    quad_error_half: float

    @property
    def ratio(self) -> float:
        return self.quad_error / self.quad_error_half if self.quad_error_half > 0 else math.inf


def liouville_quadrature_split(mu0: Ensemble, Phi: TestFunctional, cfg: SolverConfig, t: float,
                               quad_dt: float, paths: list[Trajectory] | None = None,
                               workers: int = 1) -> QuadratureSplit:
    """Residual at ``quad_dt`` and the quadrature error at quad_dt and quad_dt / 2.

    Members are sampled at quad_dt / 4 (or ``paths`` supply those samples);
    the reference integral is the Richardson extrapolation
    (4 I(q/4) - I(q/2)) / 3.
    """
    if paths is None:
        fine = mu0.t + quad_dt / 4.0 * np.arange(int(round(4 * t / quad_dt)) + 1)
        paths = _solve_members(mu0, cfg, fine, workers)
    reps = [liouville_report(mu0, Phi, cfg, t, q, paths) for q in (quad_dt, quad_dt / 2, quad_dt / 4)]
    ref = (4.0 * reps[2].integral - reps[1].integral) / 3.0
    return QuadratureSplit(reps[0].residual, reps[0].relative,
                           abs(reps[0].integral - ref), abs(reps[1].integral - ref))


# --- statistical energy equality ------------------------------------------------------------

@dataclass(frozen=True)
class StatisticalEnergyReport:
    residual: float
    lhs: float
    rhs: float
    member_residuals: tuple


def statistical_energy_report(mu0: Ensemble, cfg: SolverConfig, t: float, quad_dt: float,
                              workers: int = 1) -> StatisticalEnergyReport:
    """Mean over members of both sides of the energy balance of u - sigma(u) at time t."""
    nq = int(round(t / quad_dt))
    if nq < 1 or abs(nq * quad_dt - t) > 1e-9:
        raise ValueError("quad_dt must divide t")
    times = mu0.t + quad_dt * np.arange(nq + 1)
    paths = _solve_members(mu0, cfg, times, workers)
    budgets = [energy_budget(p, cfg=cfg) for p in paths]
    lhs = math.fsum(w * b.lhs[-1] for w, b in zip(mu0.weights, budgets))
    rhs = math.fsum(w * b.rhs[-1] for w, b in zip(mu0.weights, budgets))
    return StatisticalEnergyReport(abs(lhs - rhs), lhs, rhs,
                                   tuple(float(b.residual[-1]) for b in budgets))


def statistical_energy_residual(mu0: Ensemble, cfg: SolverConfig, t: float, quad_dt: float,
                                workers: int = 1) -> float:
    return statistical_energy_report(mu0, cfg, t, quad_dt, workers).residual


# --- vanishing viscosity, moments, expanding domains ---------------------------------

@dataclass(frozen=True)
class GapRow:
    param: float
    value: float
    gap: float


def _as_family(Phi) -> tuple[list[TestFunctional], bool]:
    if isinstance(Phi, TestFunctional):
        return [Phi], True
    return list(Phi), False


def _gap_tables(family, values, ref, params, single):
    tables = [[GapRow(float(p), v[k], abs(v[k] - ref[k])) for p, v in zip(params, values)]
              for k in range(len(family))]
    return tables[0] if single else tables


def vv_statistical_compare(mu0: Ensemble, Phi, nus, cfg: SolverConfig, t: float, workers: int = 1):
    """|int Phi d mu_t^nu - int Phi d mubar_t| per viscosity; the first row is nu = 0.

    ``Phi`` may be a single functional (one table) or a sequence of them
    (one table each, sharing the member solves).
    """
    family, single = _as_family(Phi)
    euler = pushforward(mu0, replace(cfg, nu=0.0), t, workers)
    ref = [euler.mean(F) for F in family]
    values = [ref]
    for nu in nus:
        mu = pushforward(mu0, replace(cfg, nu=float(nu)), t, workers)
        values.append([mu.mean(F) for F in family])
    return _gap_tables(family, values, ref, [0.0] + [float(nu) for nu in nus], single)


@dataclass(frozen=True)
class MomentRow:
    p: float
    mean_t: float
    bound: float
    ok: bool


def vorticity_moment_check(mu0: Ensemble, cfg: SolverConfig, t: float, ps=(1.0, 2.0, 4.0, math.inf),
                           tol: float = 1e-3, workers: int = 1) -> list[MomentRow]:
    """Mean ||omega(t)||_p against mean ||omega_0||_p + t ||omega_f||_p."""
    mu_t = pushforward(mu0, cfg, t, workers)
    wf = cfg.source_vorticity(mu0.grid)
    rows = []
    for p in ps:
        lhs = mu_t.mean(lambda s: norm_lp(s.omega, p))
        bound = mu0.mean(lambda s: norm_lp(s.omega, p))
        if wf is not None:
            bound += (t - mu0.t) * norm_lp(ScalarField2D(mu0.grid, wf), p)
        rows.append(MomentRow(float(p), lhs, bound, lhs <= bound * (1.0 + tol)))
    return rows


def check_gradient_restriction(Phi: TestFunctional, state: DiskState, target: GridSpec2D,
                               tol: float = 1e-2) -> float:
    """Compare E_R Phi_R'(v) with Phi'(E_R v) for a disk state v.

    The left side is the disk gradient extended by zero to the plane grid;
    the right side takes the coordinates of the extended velocity on the
    plane grid.  Both sides share phi and the g_j, so they differ only by
    the quadrature of the coordinates.  The L^2 mismatch is measured against
    sup|grad phi| times the norm of the stacked g_j, the largest gradient the
    functional can produce; a relative measure at the current point would
    blow up where grad phi nearly vanishes.  Returns that ratio and raises
    if it exceeds ``tol``.
    """
    disk_grad = extend_by_zero(functional_gradient(Phi, state), target)
    plane_grad = functional_gradient(Phi, extend_by_zero(state.velocity, target))
    diff = np.sqrt(np.sum((disk_grad.values - plane_grad.values) ** 2))
    scale = np.sqrt(np.sum(plane_grad.values**2))
    bound = getattr(Phi.phi, "grad_bound", lambda: None)()
    if bound is not None:
        x, y = target.mesh
        stack = sum(np.sum(f.velocity(x, y) ** 2) for f in Phi.fields)
        scale = max(scale, bound * np.sqrt(stack))
    rel = float(diff / scale) if scale > 0 else float(diff)
    if rel > tol:
        raise AssertionError(f"restricted gradient mismatch {rel:.3g}")
    return rel


def expanding_domain_statistical(mu0: Ensemble, Phi, cfg: SolverConfig, R_list, t: float,
                                 resolution: float = 32.0, n_theta: int = 128, disk_dt: float | None = None,
                                 workers: int = 1, mismatches: list | None = None):
    """|int Phi_R d mu_t^R - int Phi d mu_t| for each disk radius R.

    Members are carried to the disk by U_R, solved with no slip, and
    evaluated with the restricted functional (same phi, same g_j).  ``Phi``
    may be a sequence, as in `vv_statistical_compare`.  The gradient
    restriction identity is checked on the first member of every disk; pass
    a list as ``mismatches`` to collect the relative mismatches instead of
    raising when one exceeds 1e-2.
    """
    if cfg.nu <= 0.0:
        raise ValueError("expanding-domain comparison needs nu > 0")
    family, single = _as_family(Phi)
    smallest = min(R_list)
    if max(F.support_radius for F in family) > smallest / 2.0:
        raise ValueError("test fields must be supported in the disk of radius R/2 for the smallest R")
    plane = pushforward(mu0, cfg, t, workers)
    ref = [plane.mean(F) for F in family]
    disk_cfg = replace(cfg, dt=disk_dt or cfg.dt, T=max(cfg.T, t))
    values = []
    for R in R_list:
        grid = disk_grid_for(R, resolution, n_theta)

        def run(item):
            i, s = item
            try:
                data = approx_project_data(s.velocity, s.vortex, R, vorticity=s.omega)
                return solve_disk(data, disk_cfg, [mu0.t, t], grid=grid).final
            except Exception as exc:
                raise EnsembleMemberError(i, exc) from exc

        items = list(enumerate(mu0.states))
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                finals = list(pool.map(run, items))
        else:
            finals = [run(it) for it in items]
        for F in family:
            if mismatches is None:
                check_gradient_restriction(F, finals[0], mu0.grid)
            else:
                mismatches.append(check_gradient_restriction(F, finals[0], mu0.grid, tol=math.inf))
        values.append([math.fsum(w * F(s) for w, s in zip(mu0.weights, finals)) for F in family])
    return _gap_tables(family, values, ref, R_list, single)
