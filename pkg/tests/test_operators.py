import math

import numpy as np
import pytest
from scipy import integrate

from planevortex.fields import GridSpec2D, ScalarField2D, VectorField2D, divergence
from planevortex.flows import gaussian_vorticity
from planevortex.operators import (approx_project_data, approx_project_VR, disk_mean, project_HR,
                                   projection_error_report, truncate_Y)
from planevortex.solver_plane import PlaneState
from planevortex.stationary import collar_cutoff, collar_cutoff_prime, discrete_profile, make_sigma1


@pytest.fixture(scope="module")
def offcentre():
    g = GridSpec2D(8.0, 256)
    s = PlaneState(gaussian_vorticity(g, 1.0, 0.6, center=(0.5, -0.3)))
    return s


def test_projection_vanishes_outside_disk(offcentre):
    R = 4.0
    data = approx_project_data(offcentre.velocity, offcentre.vortex, R, vorticity=offcentre.omega)
    t = np.linspace(0, 2 * math.pi, 64)
    for r in (R, R + 0.5, 7.0):
        u = data.velocity(r * np.cos(t), r * np.sin(t))
        assert np.max(np.abs(u)) < 1e-12
    psi = data.stream(R * np.cos(t), R * np.sin(t))
    assert np.max(np.abs(psi)) < 1e-12


def test_projection_agrees_with_u_on_inner_disk(offcentre):
    R = 6.0
    u = offcentre.velocity
    proj = approx_project_VR(u, offcentre.vortex, R, vorticity=offcentre.omega)
    inner = offcentre.grid.radius < R / 2 - 0.5
    assert np.max(np.abs(proj.values - u.values)[:, inner]) < 1e-10


def test_projection_of_sigma_is_pointwise_divergence_free():
    # for v = 0 the projection is closed form, so central differences at
    # small spacing see only round-off and the O(e^2) stencil error
    g = GridSpec2D(8.0, 64)
    vortex = make_sigma1()
    s1, s2 = vortex.velocity(*g.mesh)
    u = VectorField2D(g, 1.5 * np.array([s1, s2]))
    omega = ScalarField2D(g, 1.5 * discrete_profile(vortex, g))
    data = approx_project_data(u, vortex, 4.0, vorticity=omega)
    data = type(data)(data.grid, data.vortex, data.R, data.m, 0 * data.psi_v, 0 * data.v, 0.0)
    rng = np.random.default_rng(3)
    pts = rng.uniform(-4.2, 4.2, size=(200, 2))
    e = 1e-5
    ux = (data.velocity(pts[:, 0] + e, pts[:, 1])[0] - data.velocity(pts[:, 0] - e, pts[:, 1])[0]) / (2 * e)
    vy = (data.velocity(pts[:, 0], pts[:, 1] + e)[1] - data.velocity(pts[:, 0], pts[:, 1] - e)[1]) / (2 * e)
    assert np.max(np.abs(ux + vy)) < 1e-7


def test_projection_grid_divergence_converges():
    # the field is divergence free analytically; the grid divergence is
    # differencing error plus the mismatch of the interpolated psi_v and v,
    # and falls by more than half per refinement
    out = []
    for n in (128, 256):
        g = GridSpec2D(8.0, n)
        s = PlaneState(gaussian_vorticity(g, 1.0, 0.6, center=(0.5, -0.3)))
        proj = approx_project_VR(s.velocity, s.vortex, 4.0, vorticity=s.omega)
        out.append(np.sqrt(np.sum(divergence(proj).values ** 2) * g.h**2))
    assert out[1] < out[0] / 2.0


def test_truncation_keeps_sigma_and_inner_field(offcentre):
    R = 4.0
    u = offcentre.velocity
    tr = truncate_Y(u, offcentre.vortex, R, vorticity=offcentre.omega)
    inner = offcentre.grid.radius < R / 2 - 0.5
    assert np.max(np.abs(tr.values - u.values)[:, inner]) < 1e-10
    assert np.all(tr.values[:, offcentre.grid.radius > R] == 0.0)
    assert np.array_equal(project_HR(u, R, offcentre.vortex, offcentre.omega).values, tr.values)


def test_radius_bounds(offcentre):
    with pytest.raises(ValueError):
        approx_project_data(offcentre.velocity, offcentre.vortex, 1.0, vorticity=offcentre.omega)
    with pytest.raises(ValueError):
        approx_project_data(offcentre.velocity, offcentre.vortex, 9.0, vorticity=offcentre.omega)
    with pytest.raises(ValueError):
        approx_project_data(offcentre.velocity, offcentre.vortex, 4.0, vorticity=offcentre.omega, gauge="x")


def test_disk_mean_gauge():
    g = GridSpec2D(4.0, 64)
    vals = np.ones(g.shape) * 3.0
    assert disk_mean(vals, g, 2.0) == pytest.approx(3.0)


def radial_projection_error(R, m=1.0):
    """H^1(disk) error of U_R sigma_m by 1-D quadrature of the azimuthal profile.

    sigma - U_R sigma is azimuthal with speed e(r) = (1 - h) psi' - h' (psi - psi(R));
    its squared gradient is e'^2 + e^2 / r^2.
    """
    vortex = make_sigma1()
    psi = lambda r: float(vortex.stream(r))  # noqa: E731
    dpsi = lambda r: float(vortex.gamma(r)) / (2 * math.pi * r)  # noqa: E731
    psiR = psi(R)

    def e(r):
        h = float(collar_cutoff(r, R))
        hp = float(collar_cutoff_prime(r, R))
        return m * ((1 - h) * dpsi(r) - hp * (psi(r) - psiR))

    def de(r, d=1e-6):
        return (e(r + d) - e(r - d)) / (2 * d)

    lo = R - 0.5
    l2, _ = integrate.quad(lambda r: 2 * math.pi * r * e(r) ** 2, lo, R, limit=200, epsabs=1e-14)
    gr, _ = integrate.quad(lambda r: 2 * math.pi * r * (de(r) ** 2 + e(r) ** 2 / r**2), lo, R, limit=200,
                           epsabs=1e-12)
    return math.sqrt(l2) + math.sqrt(gr)


def test_projection_error_matches_radial_quadrature():
    g = GridSpec2D(8.0, 1024)
    vortex = make_sigma1()
    m = 2.0
    s1, s2 = vortex.velocity(*g.mesh)
    u = VectorField2D(g, m * np.array([s1, s2]))
    omega = ScalarField2D(g, m * discrete_profile(vortex, g))
    rows = projection_error_report(u, vortex, [4.0, 8.0], vorticity=omega)
    for row in rows:
        exact = radial_projection_error(row.R, m)
        assert row.err_h1 == pytest.approx(exact, rel=2e-2)
    assert rows[1].err_h1 < rows[0].err_h1


def test_projection_report_bound_terms(offcentre):
    rows = projection_error_report(offcentre.velocity, offcentre.vortex, [4.0, 8.0], vorticity=offcentre.omega)
    for r in rows:
        # unit circulation, so the bound holds at least beta(R)
        assert r.bound >= r.beta * 0.99
        assert r.constant == pytest.approx(r.err_h1 / r.bound)
        assert r.ratio == pytest.approx(1.0 / r.constant)
