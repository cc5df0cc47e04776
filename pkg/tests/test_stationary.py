import math

import numpy as np
import pytest
from scipy import integrate

from planevortex.errors import CirculationUndefinedError
from planevortex.fields import GridSpec2D, ScalarField2D, curl
from planevortex.stationary import (RadialProfile, StationaryVortex, beta, bulk_cutoff, bulk_cutoff_prime,
                                    collar_cutoff, collar_cutoff_prime, decompose, decompose_vorticity,
                                    discrete_profile, eval_sigma_m, make_cutoffs, make_sigma1,
                                    sigma1_annulus_h1_sq)


@pytest.fixture(scope="module")
def closed():
    return make_sigma1()


@pytest.fixture(scope="module")
def tabulated():
    # same bump, but routed through the numerical normalization and splines
    prof = RadialProfile.from_function(lambda r: np.where(r < 1.0, np.clip(1 - r * r, 0, None) ** 3, 0.0))
    return StationaryVortex(prof)


def test_profile_has_unit_mass(closed):
    mass, _ = integrate.quad(lambda r: 2 * math.pi * r * float(closed.vorticity(r)), 0, 1)
    assert mass == pytest.approx(1.0, abs=1e-12)


def test_profile_validation():
    with pytest.raises(ValueError):
        RadialProfile.polynomial(0)
    with pytest.raises(ValueError):
        RadialProfile.from_function(lambda r: np.exp(-r * r))


@pytest.mark.parametrize("r", [0.1, 0.5, 0.9, 1.0, 2.0])
def test_closed_form_matches_tabulated(closed, tabulated, r):
    assert float(closed.gamma(r)) == pytest.approx(float(tabulated.gamma(r)), abs=1e-9)
    assert float(closed.stream(r)) == pytest.approx(float(tabulated.stream(r)), abs=1e-9)


def test_c2_matches_quadrature(closed):
    # psi(1) = int_0^1 Gamma(s) / (2 pi s) ds
    val, _ = integrate.quad(lambda s: float(closed.gamma(s)) / (2 * math.pi * s), 0, 1, epsabs=1e-14)
    assert closed.c2 == pytest.approx(val, abs=1e-12)


def test_stream_difference_outside_core(closed):
    diff = float(closed.stream(2.0) - closed.stream(1.0))
    assert abs(diff - math.log(2.0) / (2 * math.pi)) <= 1e-8


@pytest.mark.parametrize("r", [1.0, 2.0, 5.0])
def test_velocity_magnitude_outside_core(closed, r):
    u1, u2 = closed.velocity(r, 0.0)
    assert math.hypot(u1, u2) == pytest.approx(1.0 / (2 * math.pi * r), rel=1e-14)


def test_velocity_is_perp_gradient_of_stream(closed):
    # u = (-d_y psi, d_x psi) by central differences of the closed-form stream
    pts = np.array([[0.3, 0.2], [0.7, -0.4], [1.5, 0.5]])
    e = 1e-6
    for x, y in pts:
        psi = lambda a, b: float(closed.stream(math.hypot(a, b)))  # noqa: E731
        dx = (psi(x + e, y) - psi(x - e, y)) / (2 * e)
        dy = (psi(x, y + e) - psi(x, y - e)) / (2 * e)
        u1, u2 = closed.velocity(x, y)
        assert u1 == pytest.approx(-dy, abs=1e-8)
        assert u2 == pytest.approx(dx, abs=1e-8)


def test_velocity_gradient_matches_differences(closed):
    e = 1e-6
    for x, y in [(0.2, 0.1), (0.6, -0.5), (1.3, 0.9)]:
        G = closed.velocity_gradient(x, y)
        for j, (ex, ey) in enumerate([(e, 0), (0, e)]):
            up = np.array(closed.velocity(x + ex, y + ey))
            dn = np.array(closed.velocity(x - ex, y - ey))
            assert np.allclose(G[:, j], (up - dn) / (2 * e), atol=1e-7)


def test_grid_curl_recovers_profile(closed):
    g = GridSpec2D(2.0, 256)
    u = eval_sigma_m(closed, 1.0, g)
    w = curl(u)
    inner = g.radius < 1.5
    assert np.max(np.abs(w.values - closed.vorticity(g.radius))[inner]) < 2e-3
    assert discrete_profile(closed, g).sum() * g.h**2 == pytest.approx(1.0, abs=1e-14)


def test_eval_sigma_m_scales_linearly(closed):
    g = GridSpec2D(2.0, 32)
    assert np.allclose(eval_sigma_m(closed, 2.5, g).values, 2.5 * eval_sigma_m(closed, 1.0, g).values)


def test_annulus_scale_matches_quadrature():
    # |x^perp / |x|^2|^2 = 1 / r^2 and |d_r (1 / r)|^2 = 1 / r^4
    for R in (2.0, 4.0, 8.0, 16.0):
        val, _ = integrate.quad(lambda r: 2 * math.pi * r * (r**-2 + r**-4), R - 1, R, epsabs=1e-14)
        assert sigma1_annulus_h1_sq(R) == pytest.approx(val, rel=1e-12)
        assert beta(R) == pytest.approx(math.sqrt(val), rel=1e-12)
    with pytest.raises(ValueError):
        sigma1_annulus_h1_sq(1.5)


def test_decompose_recovers_circulation(closed):
    g = GridSpec2D(4.0, 128)
    u = eval_sigma_m(closed, 1.7, g)
    d = decompose(u, closed)
    assert d.m == pytest.approx(1.7, rel=1e-3)
    m, omega_v = decompose_vorticity(ScalarField2D(g, 1.7 * discrete_profile(closed, g)), closed)
    assert m == pytest.approx(1.7, rel=1e-14)
    assert np.max(np.abs(omega_v)) < 1e-12


def test_decompose_rejects_wide_vorticity(closed):
    g = GridSpec2D(1.0, 64)
    x, y = g.mesh
    u = eval_sigma_m(closed, 1.0, g)
    big = type(u)(g, u.values * 0 + np.array([-y, x]))
    with pytest.raises(CirculationUndefinedError):
        decompose(big, closed)


def test_cutoffs_shape_and_derivatives():
    R = 6.0
    r = np.linspace(0.0, 7.0, 701)
    h = collar_cutoff(r, R)
    phi = bulk_cutoff(r, R)
    assert np.all(h[r <= R - 0.5] == 1.0) and np.all(h[r >= R] == 0.0)
    assert np.all(phi[r <= R / 2] == 1.0) and np.all(phi[r >= R] == 0.0)
    e = 1e-6
    rr = np.linspace(0.1, 6.9, 37)
    assert np.allclose(collar_cutoff_prime(rr, R), (collar_cutoff(rr + e, R) - collar_cutoff(rr - e, R)) / (2 * e),
                       atol=1e-6)
    assert np.allclose(bulk_cutoff_prime(rr, R), (bulk_cutoff(rr + e, R) - bulk_cutoff(rr - e, R)) / (2 * e),
                       atol=1e-6)
    pair = make_cutoffs(2.0, GridSpec2D(4.0, 32))
    assert pair.h_R.values.max() == 1.0
    with pytest.raises(ValueError):
        make_cutoffs(8.0, GridSpec2D(4.0, 32))
