import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planevortex.errors import EmptyRegionError
from planevortex.fields import (AnnulusRegion, GridSpec2D, PolarGrid2D, ScalarField2D, VectorField2D,
                                curl, divergence, extend_by_zero, gradient, h1_parts, norm_h1, norm_lp,
                                resample_to_polar)


def gaussian(grid, a=0.5):
    x, y = grid.mesh
    return ScalarField2D(grid, np.exp(-(x * x + y * y) / (a * a)))


def test_grid_validation():
    with pytest.raises(ValueError):
        GridSpec2D(1.0, 15)
    with pytest.raises(ValueError):
        GridSpec2D(-1.0, 32)
    with pytest.raises(ValueError):
        PolarGrid2D(1.0, 4, 32)
    with pytest.raises(ValueError):
        PolarGrid2D(1.0, 16, 32, stretch=1.0)


def test_cartesian_geometry():
    g = GridSpec2D(2.0, 32)
    assert g.h == pytest.approx(0.125)
    assert g.axis[0] == pytest.approx(-2.0 + 0.0625)
    assert np.sum(g.weights) == pytest.approx(16.0)


@pytest.mark.parametrize("stretch", [0.0, 0.3, 0.6])
def test_polar_weights_cover_disk(stretch):
    g = PolarGrid2D(3.0, 24, 32, stretch)
    assert np.sum(g.weights) == pytest.approx(math.pi * 9.0, rel=1e-12)
    assert g.r[-1] == pytest.approx(3.0)
    assert g.r_faces[0] == 0.0


def test_polar_inverse_map_roundtrip():
    g = PolarGrid2D(2.0, 20, 32, 0.4)
    idx = g.inverse_map(g.r)
    assert np.allclose(idx, np.arange(g.n_r + 1), atol=1e-10)


def test_fields_are_frozen_copies():
    g = GridSpec2D(1.0, 16)
    a = np.zeros(g.shape)
    f = ScalarField2D(g, a)
    a[0, 0] = 1.0
    assert f.values[0, 0] == 0.0
    with pytest.raises(ValueError):
        f.values[0, 0] = 2.0
    with pytest.raises(ValueError):
        ScalarField2D(g, np.zeros((3, 3)))
    with pytest.raises(ValueError):
        ScalarField2D(g, np.full(g.shape, np.nan))


def test_gaussian_norms_match_closed_form():
    # int exp(-p r^2 / a^2) = pi a^2 / p
    g = GridSpec2D(4.0, 256)
    f = gaussian(g)
    assert norm_lp(f, 1.0) == pytest.approx(math.pi * 0.25, rel=1e-10)
    assert norm_lp(f, 2.0) == pytest.approx(math.sqrt(math.pi * 0.25 / 2.0), rel=1e-10)
    assert norm_lp(f, 4.0) == pytest.approx((math.pi * 0.25 / 4.0) ** 0.25, rel=1e-10)
    assert norm_lp(f, math.inf) == pytest.approx(np.exp(-2 * (g.h / 2) ** 2 / 0.25))


def test_norm_rejects_bad_input():
    g = GridSpec2D(1.0, 16)
    with pytest.raises(ValueError):
        norm_lp(gaussian(g), 0.5)
    with pytest.raises(EmptyRegionError):
        norm_lp(gaussian(g), 2.0, AnnulusRegion(5.0, 6.0))


@settings(max_examples=25, deadline=None)
@given(c=st.floats(-5, 5).filter(lambda c: c == 0 or abs(c) > 1e-6), p=st.sampled_from([1.0, 2.0, 3.0, math.inf]))
def test_norm_homogeneity(c, p):
    g = GridSpec2D(2.0, 32)
    f = gaussian(g)
    assert norm_lp(c * f, p) == pytest.approx(abs(c) * norm_lp(f, p), rel=1e-12, abs=1e-300)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.sampled_from([1.0, 2.0, 4.0, math.inf]))
def test_norm_triangle_inequality(seed, p):
    g = GridSpec2D(1.0, 16)
    rng = np.random.default_rng(seed)
    a = ScalarField2D(g, rng.standard_normal(g.shape))
    b = ScalarField2D(g, rng.standard_normal(g.shape))
    assert norm_lp(a + b, p) <= norm_lp(a, p) + norm_lp(b, p) + 1e-12


def test_gradient_exact_on_quadratics():
    g = GridSpec2D(1.0, 32)
    x, y = g.mesh
    gx, gy = gradient(ScalarField2D(g, x * x + 3 * x * y - y * y))
    assert np.allclose(gx, 2 * x + 3 * y, atol=1e-12)
    assert np.allclose(gy, 3 * x - 2 * y, atol=1e-12)


def test_rigid_rotation_curl_and_divergence():
    grid = GridSpec2D(1.0, 32)
    x, y = grid.mesh
    u = VectorField2D(grid, np.array([-y, x]))
    assert np.allclose(curl(u).values, 2.0, atol=1e-10)
    assert np.allclose(divergence(u).values, 0.0, atol=1e-10)
    # radial differences are exact on linear data; the centred angular
    # difference of cos/sin carries the factor sin(dtheta) / dtheta
    polar = PolarGrid2D(1.0, 16, 32)
    x, y = polar.mesh
    u = VectorField2D(polar, np.array([-y, x]))
    d = polar.dtheta
    assert np.allclose(curl(u).values, 1.0 + math.sin(d) / d, atol=1e-10)
    assert np.allclose(divergence(u).values, 0.0, atol=1e-10)


def test_polar_gradient_converges():
    errs = []
    for n in (16, 32):
        g = PolarGrid2D(2.0, n, 2 * n)
        x, y = g.mesh
        gx, gy = gradient(ScalarField2D(g, np.sin(x) * np.cos(y)))
        errs.append(np.max(np.abs(gx - np.cos(x) * np.cos(y))) + np.max(np.abs(gy + np.sin(x) * np.sin(y))))
    assert errs[1] < errs[0] / 3.0


def test_h1_parts_of_linear_field():
    # v = (x, 0) on the disk of radius 1: ||v||^2 = pi / 4, ||grad v||^2 = pi
    g = GridSpec2D(2.0, 400)
    x, y = g.mesh
    v = VectorField2D(g, np.array([x, 0 * y]))
    l2, grad = h1_parts(v, AnnulusRegion(0.0, 1.0))
    assert l2 == pytest.approx(math.sqrt(math.pi / 4), rel=1e-2)
    assert grad == pytest.approx(math.sqrt(math.pi), rel=1e-2)
    assert norm_h1(v, AnnulusRegion(0.0, 1.0)) == pytest.approx(l2 + grad)


def test_resample_and_extend_roundtrip():
    cart = GridSpec2D(2.0, 128)
    polar = PolarGrid2D(1.5, 48, 96)
    f = gaussian(cart)
    back = extend_by_zero(resample_to_polar(f, polar), cart)
    inside = cart.radius <= 1.0
    assert np.max(np.abs(back.values[inside] - f.values[inside])) < 1e-4
    assert np.all(back.values[cart.radius > 1.5] == 0.0)
    with pytest.raises(ValueError):
        resample_to_polar(f, PolarGrid2D(3.0, 16, 32))
