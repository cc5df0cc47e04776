import math

import numpy as np
import pytest

from planevortex.fields import GridSpec2D, PolarGrid2D, ScalarField2D, resample_to_polar
from planevortex.flows import gaussian_vorticity, lamb_oseen_vorticity
from planevortex.operators import approx_project_data
from planevortex.solver_disk import (DiskState, disk_circulation, disk_energy, disk_state_from_stream,
                                     disk_state_from_vorticity, get_disk_operator, initial_disk_state,
                                     solve_disk, zero_disk_state)
from planevortex.solver_plane import PlaneState, SolverConfig


def quartic(grid):
    # psi = (R^2 - r^2)^2 vanishes with its radial derivative on the wall;
    # Laplacian(psi) = 16 r^2 - 8 R^2
    r = grid.radius
    R = grid.R
    return (R * R - r * r) ** 2, 16 * r * r - 8 * R * R


def test_poisson_solve_converges_to_closed_form():
    errs = []
    for n in (16, 32):
        g = PolarGrid2D(1.0, n, 32)
        psi, lap = quartic(g)
        st = disk_state_from_vorticity(g, lap[:-1])
        errs.append(np.max(np.abs(st.psi - psi)))
    assert errs[1] < errs[0] / 3.0
    assert errs[1] < 1e-3


def test_laplacian_inverts_stream():
    g = PolarGrid2D(2.0, 24, 48)
    op = get_disk_operator(g)
    rng = np.random.default_rng(1)
    q = rng.standard_normal((g.n_r, g.n_theta))
    psi = op.stream(q)
    assert np.allclose(op.laplacian(psi), q, atol=1e-10)
    assert np.all(psi[-1] == 0.0)


def test_wall_vorticity_of_no_slip_stream():
    g = PolarGrid2D(1.0, 64, 32)
    psi, lap = quartic(g)
    wall = get_disk_operator(g).wall_vorticity(psi)
    assert np.allclose(wall, 8.0, rtol=2e-2)


def test_no_slip_state_has_zero_velocity_and_circulation():
    g = PolarGrid2D(1.0, 48, 64)
    psi, _ = quartic(g)
    st = disk_state_from_stream(g, psi)
    assert np.all(st.velocity.values[:, -1] == 0.0)
    # Stokes: circulation equals the wall line integral of u, which is zero
    assert abs(disk_circulation(st)) < 1e-2 * np.sum(np.abs(st.omega) * g.weights)


def test_viscous_energy_decays():
    grid = GridSpec2D(4.0, 64)
    data = approx_project_data(PlaneState(gaussian_vorticity(grid, 1.0, 0.5, (0.3, 0.0))).velocity, None, 3.0,
                               vorticity=gaussian_vorticity(grid, 1.0, 0.5, (0.3, 0.0)))
    g = PolarGrid2D(3.0, 32, 64)
    traj = solve_disk(data, SolverConfig(nu=5e-2, dt=0.02, T=0.4), np.linspace(0, 0.4, 5), grid=g)
    e = [disk_energy(s) for s in traj]
    assert all(b < a for a, b in zip(e, e[1:]))


def test_quarter_turn_equivariance():
    g = PolarGrid2D(2.0, 24, 48)
    x, y = g.mesh
    w = np.exp(-((x - 0.5) ** 2 + (y + 0.2) ** 2) / 0.2)
    cfg = SolverConfig(nu=1e-2, dt=0.02, T=0.1)
    a = solve_disk(disk_state_from_vorticity(g, w[:-1]), cfg, [0.1]).final.omega
    k = g.n_theta // 4
    b = solve_disk(disk_state_from_vorticity(g, np.roll(w, k, axis=1)[:-1]), cfg, [0.1]).final.omega
    assert np.max(np.abs(np.roll(a, k, axis=1) - b)) < 1e-12


def test_centred_vortex_tracks_heat_profile_away_from_wall():
    # far from the wall the no-slip layer has not arrived yet
    plane = GridSpec2D(6.0, 128)
    g = PolarGrid2D(5.0, 80, 64)
    w0 = resample_to_polar(gaussian_vorticity(plane, 1.0, 0.6), g)
    traj = solve_disk(ScalarField2D(g, w0.values), SolverConfig(nu=2e-2, dt=0.01, T=0.5), [0.5], grid=g)
    exact = resample_to_polar(lamb_oseen_vorticity(plane, 0.5, 2e-2, 1.0, 0.6), g).values
    inner = g.radius < 2.0
    assert np.max(np.abs(traj.final.omega - exact)[inner]) < 2e-2 * exact.max()


def test_initial_state_reproduces_projected_stream():
    grid = GridSpec2D(4.0, 64)
    w = gaussian_vorticity(grid, 1.0, 0.5, (0.3, 0.0))
    data = approx_project_data(PlaneState(w).velocity, None, 3.0, vorticity=w)
    g = PolarGrid2D(3.0, 32, 64)
    st = initial_disk_state(data, g)
    x, y = g.mesh
    ref = data.stream(x, y)
    assert np.max(np.abs(st.psi - (ref - ref[-1].mean()))) < 1e-12


def test_solve_disk_validation():
    g = PolarGrid2D(2.0, 16, 32)
    z = zero_disk_state(g)
    assert isinstance(z, DiskState)
    with pytest.raises(ValueError):
        solve_disk(z, SolverConfig(nu=0.0), [0.1])
    with pytest.raises(ValueError):
        solve_disk(z, SolverConfig(nu=1e-2, T=0.1), [0.2])
    with pytest.raises(TypeError):
        initial_disk_state(object(), g)
    traj = solve_disk(z, SolverConfig(nu=1e-2, T=0.1), [0.1])
    assert np.all(traj.final.omega == 0.0)
    assert traj.final.t == pytest.approx(0.1)
    assert math.isfinite(disk_energy(traj.final))
