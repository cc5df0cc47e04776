"""Named reproduction studies run by the command line front end.

Each study takes a parameter dict (defaults below, overridable from the
config file) and a `Context`, and returns a `StudyResult` holding CSV tables,
pass/fail checks and optional field snapshots.  Defaults reproduce the
acceptance-scale runs; small parameter sets give quick smoke runs.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .biot_savart import biot_savart, biot_savart_direct
from .fields import GridSpec2D, ScalarField2D, VectorField2D, norm_lp
from .flows import gaussian_vorticity, lamb_oseen_vorticity, patch_vorticity
from .operators import projection_error_report
from .solver_plane import PlaneState, SolverConfig, solve
from .stationary import discrete_profile, make_sigma1
from .statistics import (Ensemble, expanding_domain_statistical, liouville_quadrature_split,
                         liouville_report, pushforward_paths, sample_patch_ensemble,
                         sample_vortex_ensemble, shipped_family, statistical_energy_report,
                         vorticity_moment_check, vv_statistical_compare)
from .verification import (damped_circulation_check, expanding_domain_study, loglog_slope,
                           vanishing_viscosity_study)


@dataclass
class Context:
    workers: int = 1
    seed: int | None = None


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    relation: str  # "<=", ">=" or "is"

    @property
    def passed(self) -> bool:
        if self.relation == "<=":
            return bool(self.value <= self.threshold)
        if self.relation == ">=":
            return bool(self.value >= self.threshold)
        return bool(self.value) is bool(self.threshold)

    def as_dict(self) -> dict:
        return {"name": self.name, "value": _plain(self.value), "threshold": _plain(self.threshold),
                "relation": self.relation, "pass": self.passed}


def _plain(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    return float(x)


@dataclass
class StudyResult:
    tables: dict = field(default_factory=dict)   # name -> list of row dicts
    checks: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # (name, field, meta)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass(frozen=True)
class Study:
    name: str
    description: str
    anchor: str
    defaults: dict
    runner: Callable
    needs_seed: bool = False


def _strictly_decreasing(vals) -> bool:
    return all(b < a for a, b in zip(vals, vals[1:]))


def _check_positive(p: dict, *keys):
    for k in keys:
        v = p[k]
        vals = v if isinstance(v, list) else [v]
        if not vals or any(not (x > 0) for x in vals):
            raise ValueError(f"{k} must be positive")


def _even_grid(extent, n) -> GridSpec2D:
    return GridSpec2D(float(extent), int(n))


# --- deterministic studies -------------------------------------------------------

def run_biot_savart_oracle(p: dict, ctx: Context) -> StudyResult:
    _check_positive(p, "extent", "support")
    grid = _even_grid(p["extent"], p["n"])
    rng = np.random.default_rng(ctx.seed)
    vals = rng.standard_normal(grid.shape)
    vals[grid.radius > p["support"] * grid.extent] = 0.0
    omega = ScalarField2D(grid, vals)
    t0 = time.perf_counter()
    fast = biot_savart(omega)
    elapsed = time.perf_counter() - t0
    direct = biot_savart_direct(omega)
    rel = float(np.linalg.norm(fast.values - direct.values) / np.linalg.norm(direct.values))
    res = StudyResult()
    res.tables["oracle"] = [{"n": grid.n, "rel_l2": rel, "fast_seconds": elapsed}]
    res.checks.append(Check("rel_l2", rel, p["tol"], "<="))
    res.checks.append(Check("fast_seconds", elapsed, p["max_seconds"], "<="))
    return res


def run_projection_error(p: dict, ctx: Context) -> StudyResult:
    _check_positive(p, "extent", "R_list", "m")
    grid = _even_grid(p["extent"], p["n"])
    vortex = make_sigma1()
    m = p["m"]
    s1, s2 = vortex.velocity(*grid.mesh)
    u = VectorField2D(grid, m * np.array([s1, s2]))
    omega = ScalarField2D(grid, m * discrete_profile(vortex, grid))
    rows = projection_error_report(u, vortex, p["R_list"], vorticity=omega)
    res = StudyResult()
    res.tables["projection"] = [
        {"R": r.R, "err_h1": r.err_h1, "beta": r.beta, "m_beta": abs(m) * r.beta,
         "C": r.err_h1 / (abs(m) * r.beta)} for r in rows]
    C = max(r.err_h1 / (abs(m) * r.beta) for r in rows)
    res.checks.append(Check("C", C, p["C_max"], "<="))
    res.checks.append(Check("error_decreasing", _strictly_decreasing([r.err_h1 for r in rows]), True, "is"))
    return res


def run_lamb_oseen(p: dict, ctx: Context) -> StudyResult:
    _check_positive(p, "extent", "nu", "t", "dt", "core")
    grid = _even_grid(p["extent"], p["n"])
    om0 = gaussian_vorticity(grid, p["circulation"], p["core"])
    cfg = SolverConfig(nu=p["nu"], dt=p["dt"], T=p["t"])
    t0 = time.perf_counter()
    traj = solve(PlaneState(om0), cfg, [0.0, p["t"]])
    elapsed = time.perf_counter() - t0
    exact = lamb_oseen_vorticity(grid, p["t"], p["nu"], p["circulation"], p["core"])
    rel = norm_lp(traj.final.omega - exact) / norm_lp(exact)
    res = StudyResult()
    res.tables["lamb_oseen"] = [{"n": grid.n, "t": p["t"], "rel_l2": rel, "seconds": elapsed}]
    res.checks.append(Check("rel_l2", rel, p["tol"], "<="))
    res.snapshots.append(("omega_final", traj.final.omega, {"time": p["t"], "nu": p["nu"], "label": "lamb-oseen"}))
    return res


def run_radial_euler(p: dict, ctx: Context) -> StudyResult:
    _check_positive(p, "extent", "t", "dt", "core")
    grid = _even_grid(p["extent"], p["n"])
    om0 = gaussian_vorticity(grid, p["circulation"], p["core"])
    times = np.linspace(0.0, p["t"], int(p["samples"]))
    traj = solve(PlaneState(om0), SolverConfig(nu=0.0, dt=p["dt"], T=p["t"]), times)
    base = norm_lp(om0)
    rows = [{"t": s.t, "rel_l2": norm_lp(s.omega - om0) / base, "circulation": s.circulation}
            for s in traj.states]
    res = StudyResult()
    res.tables["radial_euler"] = rows
    res.checks.append(Check("rel_l2", rows[-1]["rel_l2"], p["tol"], "<="))
    return res


def _patch_state(grid, p) -> PlaneState:
    return PlaneState(patch_vorticity(grid, p["strength"], tuple(p["semi_axes"]), tuple(p["center"]),
                                      p["angle"], edge=p["edge"]))


def run_expanding_domain(p: dict, ctx: Context) -> StudyResult:
    _check_positive(p, "extent", "nu", "T", "dt", "disk_dt", "R_list", "resolution")
    grid = _even_grid(p["extent"], p["n"])
    u0 = _patch_state(grid, p)
    cfg = SolverConfig(nu=p["nu"], dt=p["dt"], T=p["T"])
    rows = expanding_domain_study(u0, cfg, p["R_list"], resolution=p["resolution"],
                                  n_theta=int(p["n_theta"]), samples=int(p["samples"]), disk_dt=p["disk_dt"])
    res = StudyResult()
    res.tables["expanding_domain"] = [
        {"R": r.R, "sup_h1": r.sup_h1, "grad_l2": r.grad_l2, "corollary_sup": r.corollary_sup,
         "n_r": r.n_r, "n_theta": r.n_theta} for r in rows]
    h1 = [r.sup_h1 for r in rows]
    gr = [r.grad_l2 for r in rows]
    res.checks += [
        Check("sup_h1_decreasing", _strictly_decreasing(h1), True, "is"),
        Check("grad_l2_decreasing", _strictly_decreasing(gr), True, "is"),
        Check("sup_h1_ratio", h1[-1] / h1[0], p["ratio_max"], "<="),
        Check("grad_l2_ratio", gr[-1] / gr[0], p["ratio_max"], "<="),
    ]
    return res


def run_vanishing_viscosity(p: dict, ctx: Context) -> StudyResult:
    _check_positive(p, "extent", "nus", "T", "dt")
    grid = _even_grid(p["extent"], p["n"])
    u0 = _patch_state(grid, p)
    rep = vanishing_viscosity_study(u0, p["nus"], SolverConfig(dt=p["dt"], T=p["T"]), samples=int(p["samples"]))
    res = StudyResult()
    res.tables["vanishing_viscosity"] = [{"nu": r.nu, "sup_w": r.sup_w, "rho": r.rho} for r in rep.rows]
    res.checks += [
        Check("decreasing", rep.decreasing, True, "is"),
        Check("slope", rep.slope, p["slope_min"], ">="),
        Check("below_envelope", rep.below_envelope, True, "is"),
    ]
    return res


def run_damped_circulation(p: dict, ctx: Context) -> StudyResult:
    _check_positive(p, "extent", "T", "dt", "gamma")
    grid = _even_grid(p["extent"], p["n"])
    om0 = gaussian_vorticity(grid, p["circulation"], p["core"], tuple(p["center"]))
    m0 = om0.integral()
    eta = float(p["eta"])
    forcing = gaussian_vorticity(grid, 1.0, p["core"]) * eta if eta != 0.0 else None
    times = np.linspace(0.0, p["T"], int(p["samples"]))
    res = StudyResult()
    rows = []
    for nu in p["conservation_nus"]:
        traj = solve(PlaneState(om0), SolverConfig(nu=nu, dt=p["dt"], T=p["T"]), times)
        dev = max(abs(s.circulation - m0) for s in traj.states)
        rows.append({"case": f"conserve nu={nu:g}", "gamma": 0.0, "eta": 0.0, "deviation": dev})
        res.checks.append(Check(f"conservation_nu_{nu:g}", dev, p["conservation_tol"], "<="))
    cfg = SolverConfig(nu=p["nu"], gamma=p["gamma"], dt=p["dt"], T=p["T"], forcing_vorticity=forcing)
    traj = solve(PlaneState(om0), cfg, times)
    dev = damped_circulation_check(traj, p["gamma"], eta)
    rows.append({"case": "damped", "gamma": p["gamma"], "eta": eta, "deviation": dev})
    res.checks.append(Check("damped_deviation", dev, p["damped_tol"], "<="))
    res.tables["circulation"] = rows
    res.tables["damped_series"] = [{"t": s.t, "m": s.circulation} for s in traj.states]
    return res


# --- ensemble studies -------------------------------------------------------------

def _patch_ensemble(p: dict, ctx: Context) -> Ensemble:
    grid = _even_grid(p["extent"], p["n"])
    return sample_patch_ensemble(grid, int(p["members"]), ctx.seed, edge=p["edge"],
                                 signed=bool(p.get("signed", False)))


def run_liouville(p: dict, ctx: Context) -> StudyResult:
    _check_positive(p, "extent", "t", "dt", "members", "quad_steps")
    mu0 = _patch_ensemble(p, ctx)
    cfg = SolverConfig(nu=p["nu"], dt=p["dt"], T=p["t"])
    t = p["t"]
    steps = int(p["quad_steps"])
    if steps % 4:
        raise ValueError("quad_steps must be a multiple of 4")
    q = t / steps
    paths = pushforward_paths(mu0, cfg, q * np.arange(steps + 1), ctx.workers)
    res = StudyResult()
    rows = []
    for name, F in shipped_family().items():
        rep = liouville_report(mu0, F, cfg, t, q, paths)
        split = liouville_quadrature_split(mu0, F, cfg, t, 4 * q, paths)
        rows.append({"functional": name, "mean_t": rep.mean_t, "residual": rep.residual,
                     "relative": rep.relative, "quad_error": split.quad_error,
                     "quad_error_half": split.quad_error_half, "ratio": split.ratio})
        res.checks.append(Check(f"{name}_relative", rep.relative, p["rel_tol"], "<="))
        res.checks.append(Check(f"{name}_halving_ratio", split.ratio, p["ratio_min"], ">="))
    res.tables["liouville"] = rows
    return res


def run_statistical_energy(p: dict, ctx: Context) -> StudyResult:
    _check_positive(p, "extent", "t", "dt", "members", "n_list", "quad_steps")
    t = p["t"]
    cfg = SolverConfig(nu=p["nu"], dt=p["dt"], T=t)
    rows = []
    for n in p["n_list"]:
        grid = _even_grid(p["extent"], n)
        mu0 = sample_vortex_ensemble(grid, int(p["members"]), ctx.seed)
        rep = statistical_energy_report(mu0, cfg, t, t / int(p["quad_steps"]), ctx.workers)
        rows.append({"n": int(n), "h": grid.h, "residual": rep.residual, "lhs": rep.lhs, "rhs": rep.rhs,
                     "circulations": " ".join(f"{s.circulation:.6f}" for s in mu0.states)})
    for a, b in zip(rows, rows[1:]):
        b["order"] = math.log(a["residual"] / b["residual"]) / math.log(a["h"] / b["h"])
    res = StudyResult()
    res.tables["refinement"] = rows
    res.checks.append(Check("decreasing", _strictly_decreasing([r["residual"] for r in rows]), True, "is"))
    if len(rows) > 1:
        res.checks.append(Check("observed_order", rows[-1]["order"], p["order_min"], ">="))
    if p["degenerate_n"] > 0:
        grid = _even_grid(p["degenerate_extent"], p["degenerate_n"])
        vortex = make_sigma1()
        st = PlaneState(ScalarField2D(grid, p["degenerate_m"] * discrete_profile(vortex, grid)))
        td = p["degenerate_t"]
        rep = statistical_energy_report(Ensemble.uniform([st]), SolverConfig(nu=0.0, dt=p["dt"], T=td),
                                        td, td / 10.0)
        res.tables["degenerate"] = [{"n": grid.n, "t": td, "m": p["degenerate_m"], "residual": rep.residual}]
        res.checks.append(Check("degenerate_residual", rep.residual, p["degenerate_tol"], "<="))
    return res


def run_vorticity_moments(p: dict, ctx: Context) -> StudyResult:
    _check_positive(p, "extent", "t", "dt", "members")
    mu0 = _patch_ensemble(p, ctx)
    res = StudyResult()
    rows = []
    for nu in p["nus"]:
        table = vorticity_moment_check(mu0, SolverConfig(nu=nu, dt=p["dt"], T=p["t"]), p["t"],
                                       tol=p["rel_tol"], workers=ctx.workers)
        for r in table:
            rows.append({"nu": nu, "p": r.p, "mean_t": r.mean_t, "bound": r.bound,
                         "excess": r.mean_t / r.bound - 1.0, "ok": r.ok})
            res.checks.append(Check(f"nu_{nu:g}_p_{r.p:g}", r.ok, True, "is"))
    res.tables["moments"] = rows
    return res


def run_statistical_vv(p: dict, ctx: Context) -> StudyResult:
    _check_positive(p, "extent", "t", "dt", "members", "nus")
    mu0 = _patch_ensemble(p, ctx)
    family = shipped_family()
    tables = vv_statistical_compare(mu0, list(family.values()), p["nus"], SolverConfig(dt=p["dt"], T=p["t"]),
                                    p["t"], ctx.workers)
    res = StudyResult()
    rows = []
    for (name, _), table in zip(family.items(), tables):
        gaps = [r.gap for r in table[1:]]
        rows += [{"functional": name, "nu": r.param, "value": r.value, "gap": r.gap} for r in table]
        res.checks.append(Check(f"{name}_decreasing", _strictly_decreasing(gaps), True, "is"))
        res.checks.append(Check(f"{name}_slope", loglog_slope([r.param for r in table[1:]], gaps),
                                p["slope_min"], ">="))
    res.tables["statistical_vv"] = rows
    return res


def run_statistical_expanding(p: dict, ctx: Context) -> StudyResult:
    _check_positive(p, "extent", "t", "dt", "disk_dt", "members", "R_list", "nu", "resolution")
    mu0 = _patch_ensemble(p, ctx)
    family = shipped_family()
    cfg = SolverConfig(nu=p["nu"], dt=p["dt"], T=p["t"])
    mismatches: list[float] = []
    tables = expanding_domain_statistical(mu0, list(family.values()), cfg, p["R_list"], p["t"],
                                          resolution=p["resolution"], n_theta=int(p["n_theta"]),
                                          disk_dt=p["disk_dt"], workers=ctx.workers, mismatches=mismatches)
    res = StudyResult()
    res.checks.append(Check("gradient_restriction", max(mismatches), 1e-2, "<="))
    rows = []
    for (name, _), table in zip(family.items(), tables):
        gaps = [r.gap for r in table]
        rows += [{"functional": name, "R": r.param, "value": r.value, "gap": r.gap} for r in table]
        res.checks.append(Check(f"{name}_decreasing", _strictly_decreasing(gaps), True, "is"))
        res.checks.append(Check(f"{name}_ratio", gaps[-1] / gaps[0], p["ratio_max"], "<="))
    res.tables["statistical_expanding"] = rows
    return res


# --- registry ----------------------------------------------------------------------

_PATCH = {"strength": 1.0, "semi_axes": [1.0, 0.6], "center": [0.8, 0.3], "angle": 0.3, "edge": 0.1}

STUDIES: dict[str, Study] = {s.name: s for s in [
    Study("biot-savart-oracle", "fast Biot-Savart convolution against direct quadrature",
          "velocity from vorticity by the Biot-Savart law",
          {"n": 32, "extent": 4.0, "support": 0.4, "tol": 1e-8, "max_seconds": 5.0},
          run_biot_savart_oracle, needs_seed=True),
    Study("projection-error", "H^1 error of the disk projection of sigma_m against m beta(R)",
          "projection error of sigma_m bounded by a multiple of beta(R)",
          {"n": 1024, "extent": 16.0, "m": 5.0, "R_list": [4.0, 8.0, 16.0], "C_max": 4.0},
          run_projection_error),
    Study("lamb-oseen", "Gaussian vortex against the exact heat-evolved profile",
          "radial vorticity evolves by the heat equation",
          {"n": 256, "extent": 5.0, "nu": 1e-2, "t": 1.0, "dt": 0.1, "circulation": 1.0, "core": 1.0,
           "tol": 1e-4},
          run_lamb_oseen),
    Study("radial-euler", "stationarity of a radial vortex under Euler",
          "radially symmetric vorticity gives a stationary Euler solution",
          {"n": 256, "extent": 5.0, "t": 1.0, "dt": 0.1, "samples": 5, "circulation": 1.0, "core": 1.0,
           "tol": 1e-5},
          run_radial_euler),
    Study("expanding-domain", "no-slip disk solutions against the whole-plane solution as R grows",
          "expanding-domain limit of disk solutions in H^1",
          dict(_PATCH, n=512, extent=16.0, nu=1e-2, T=0.5, dt=0.05, disk_dt=0.01,
               R_list=[4.0, 8.0, 16.0], resolution=16.0, n_theta=128, samples=6, ratio_max=0.5),
          run_expanding_domain),
    Study("vanishing-viscosity", "Navier-Stokes against Euler for patch data along a viscosity ladder",
          "vanishing-viscosity rate (C nu t)^(exp(-C t)/2)",
          dict(_PATCH, center=[0.3, 0.1], edge=0.0, n=256, extent=4.0, T=0.5, dt=0.02, samples=6,
               nus=[1e-1, 5e-2, 2.5e-2, 1.25e-2], slope_min=0.4),
          run_vanishing_viscosity),
    Study("liouville", "Liouville identity for a pushforward patch ensemble",
          "statistical solution: evolution identity for cylindrical test functionals",
          {"n": 256, "extent": 4.0, "members": 8, "edge": 0.1, "nu": 1e-2, "t": 0.5, "dt": 0.01,
           "quad_steps": 64, "rel_tol": 1e-3, "ratio_min": 3.0},
          run_liouville, needs_seed=True),
    Study("statistical-energy", "ensemble energy balance of u - sigma(u) under grid refinement",
          "statistical solution: energy equality with sigma corrections",
          {"n_list": [96, 192, 384], "extent": 3.0, "members": 4, "nu": 1e-2, "t": 0.5, "dt": 0.01,
           "quad_steps": 40, "order_min": 1.5, "degenerate_n": 512, "degenerate_extent": 4.0,
           "degenerate_t": 0.2, "degenerate_m": 2.0, "degenerate_tol": 1e-12},
          run_statistical_energy, needs_seed=True),
    Study("vorticity-moments", "ensemble-mean vorticity L^p norms against their bound",
          "mean vorticity L^p norms bounded by initial norms plus forcing",
          {"n": 256, "extent": 4.0, "members": 4, "edge": 0.0, "signed": True, "nus": [0.0, 1e-2],
           "t": 0.5, "dt": 0.01, "rel_tol": 1e-3},
          run_vorticity_moments, needs_seed=True),
    Study("statistical-vv", "functional gaps between viscous and inviscid pushforward ensembles",
          "vanishing-viscosity limit for statistical solutions",
          {"n": 256, "extent": 4.0, "members": 4, "edge": 0.1, "nus": [1e-1, 5e-2, 2.5e-2, 1.25e-2],
           "t": 0.5, "dt": 0.02, "slope_min": 0.4},
          run_statistical_vv, needs_seed=True),
    Study("statistical-expanding", "functional gaps between disk and plane pushforward ensembles",
          "expanding-domain limit for statistical solutions",
          {"n": 512, "extent": 16.0, "members": 4, "edge": 0.1, "nu": 0.1, "t": 2.0, "dt": 0.05,
           "disk_dt": 0.01, "R_list": [4.0, 8.0, 16.0], "resolution": 32.0, "n_theta": 128,
           "ratio_max": 0.5},
          run_statistical_expanding, needs_seed=True),
    Study("damped-circulation", "circulation conservation and the damped circulation law",
          "m' + gamma m = eta with exponential solution",
          {"n": 128, "extent": 4.0, "circulation": 1.0, "core": 0.5, "center": [0.3, -0.2], "nu": 1e-2,
           "gamma": 0.5, "eta": 0.0, "T": 1.0, "dt": 0.05, "samples": 11,
           "conservation_nus": [0.0, 1e-2], "conservation_tol": 1e-8, "damped_tol": 1e-10},
          run_damped_circulation),
]}
