import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import fd_derivative_weights
from pilotwave.grid import (ComplexField, Grid, ScalarField, derivative, fd_weights, gradient,
                            integrate, laplacian, norm)
from pilotwave.sources import interpolate


@pytest.mark.parametrize("offsets,order", [((-2, -1, 0, 1, 2), 1), ((-2, -1, 0, 1, 2), 2),
                                           ((0, 1, 2, 3, 4), 1), ((-1, 0, 1, 2, 3, 4), 2)])
def test_fd_weights_match_exact_rationals(offsets, order):
    np.testing.assert_allclose(fd_weights(offsets, order), fd_derivative_weights(offsets, order),
                               rtol=1e-12, atol=1e-12)


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        Grid((0.0,), (1.0,), (4,))
    with pytest.raises(ValueError):
        Grid((1.0,), (0.0,), (16,))
    with pytest.raises(ValueError):
        Grid((0.0,), (1.0,), (16,), "neumann")
    with pytest.raises(ValueError):
        Grid((0.0, 0.0), (1.0,), (16, 16))


def test_grid_dict_roundtrip():
    g = Grid((0.0, -1.0), (1.0, 2.0), (16, 24), "dirichlet")
    assert Grid.from_dict(g.to_dict()) == g


def test_dirichlet_axis_excludes_walls():
    g = Grid.cube(0.0, 1.0, 9, 1, "dirichlet")
    x = g.axis(0)
    assert g.spacing[0] == pytest.approx(0.1)
    assert x[0] == pytest.approx(0.1) and x[-1] == pytest.approx(0.9)


def test_spectral_derivatives_are_exact_for_band_limited_data():
    g = Grid.cube(0.0, 2 * np.pi, 32, 1)
    x = g.axis(0)
    f = np.sin(3 * x) + 0.5 * np.cos(5 * x)
    np.testing.assert_allclose(derivative(f, g, 0, 1), 3 * np.cos(3 * x) - 2.5 * np.sin(5 * x),
                               atol=1e-12)
    np.testing.assert_allclose(derivative(f, g, 0, 2), -9 * np.sin(3 * x) - 12.5 * np.cos(5 * x),
                               atol=1e-11)


def test_dirichlet_laplacian_converges_at_fourth_order():
    errs = []
    for n in (32, 64, 128):
        g = Grid.cube(0.0, 1.0, n, 1, "dirichlet")
        x = g.axis(0)
        f = ScalarField(g, np.exp(x) * np.sin(np.pi * x))
        exact = np.exp(x) * ((1 - np.pi**2) * np.sin(np.pi * x) + 2 * np.pi * np.cos(np.pi * x))
        errs.append(np.max(np.abs(laplacian(f).values - exact)))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 3.5)


def test_constants_have_zero_derivatives_exactly():
    for boundary in ("periodic", "dirichlet"):
        g = Grid.cube(0.0, 1.0, 16, 2, boundary)
        f = ScalarField(g, np.full(g.shape, 3.7))
        assert np.all(gradient(f).values == 0)
        assert np.all(laplacian(f).values == 0)


def test_non_finite_values_are_rejected():
    g = Grid.cube(0.0, 1.0, 16, 1)
    vals = np.ones(16)
    vals[3] = np.nan
    with pytest.raises(ValueError):
        laplacian(ScalarField(g, vals))


def test_norm_of_sampled_gaussian():
    g = Grid.cube(-10.0, 10.0, 200, 1)
    x = g.axis(0)
    psi = ComplexField(g, (2 * np.pi) ** -0.25 * np.exp(-x**2 / 4) + 0j)
    assert norm(psi) == pytest.approx(1.0, abs=1e-12)
    assert integrate(np.ones(g.shape), g) == pytest.approx(20.0)


@settings(max_examples=40, deadline=None)
@given(coef=st.lists(st.floats(-2, 2), min_size=4, max_size=4),
       x=st.floats(0.3, 0.7))
def test_cubic_interpolation_is_exact_for_cubics(coef, x):
    g = Grid.cube(0.0, 1.0, 32, 1, "dirichlet")
    poly = np.polynomial.Polynomial(coef)
    got = interpolate(poly(g.axis(0)), g, np.array([[x]]))[0]
    assert got == pytest.approx(poly(x), abs=1e-11)


def test_interpolation_outside_grid_is_nan():
    g = Grid.cube(0.0, 1.0, 16, 2)
    out = interpolate(np.ones(g.shape), g, np.array([[0.5, 1.5], [0.5, 0.5]]))
    assert np.isnan(out[0]) and out[1] == pytest.approx(1.0)
