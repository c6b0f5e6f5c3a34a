import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpattern import (ConfigurationError, NumericalError, ScalarField2D,
                      VectorField2D, divergence, gradient, jacobian, laplacian,
                      make_grid, perp_gradient, sample_bilinear)


def test_grid_geometry():
    g = make_grid(5, 9, (-1.0, 1.0, 0.0, 2.0))
    assert g.hx == 0.5 and g.hy == 0.25
    assert g.node(0, 0) == (-1.0, 0.0)
    assert g.node(4, 8) == (1.0, 2.0)
    X, Y = g.meshes()
    assert X.shape == (9, 5)
    assert X[3, 1] == -0.5 and Y[2, 0] == 0.5
    inner = g.interior_mask(rings=2)
    assert not inner[1, :].any() and inner[2, 2:-2].all()


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        make_grid(3, 8, (0.0, 1.0, 0.0, 1.0))
    with pytest.raises(ConfigurationError):
        make_grid(8, 8, (1.0, 0.0, 0.0, 1.0))


def test_field_shape_and_finiteness_guards():
    g = make_grid(4, 4, (0.0, 1.0, 0.0, 1.0))
    with pytest.raises(ConfigurationError):
        ScalarField2D(g, np.zeros((4, 5)))
    bad = np.zeros((4, 4))
    bad[1, 2] = np.nan
    with pytest.raises(NumericalError):
        ScalarField2D(g, bad)
    g2 = make_grid(5, 4, (0.0, 1.0, 0.0, 1.0))
    with pytest.raises(ConfigurationError):
        VectorField2D(ScalarField2D(g, np.zeros((4, 4))),
                      ScalarField2D(g2, np.zeros((4, 5))))


def test_derivatives_exact_on_quadratics():
    # centered and one-sided edge stencils are both second order, so any
    # quadratic is differentiated without truncation error
    g = make_grid(13, 11, (-1.0, 2.0, -2.0, 1.0))
    f = ScalarField2D.from_function(g, lambda x, y: x * x + 3.0 * x * y - y * y + 0.5)
    gr = gradient(f)
    X, Y = g.meshes()
    assert np.allclose(gr.x1.values, 2.0 * X + 3.0 * Y, atol=1e-12)
    assert np.allclose(gr.x2.values, 3.0 * X - 2.0 * Y, atol=1e-12)
    assert np.allclose(laplacian(f).values, 0.0, atol=1e-12)


def test_perp_gradient_is_rotated_gradient_and_divergence_free():
    g = make_grid(24, 24, (-1.0, 1.0, -1.0, 1.0))
    f = ScalarField2D.from_function(g, lambda x, y: np.sin(2.0 * x) * np.cos(y))
    gr = gradient(f)
    pg = perp_gradient(f)
    assert np.array_equal(pg.x1.values, gr.x2.values)
    assert np.array_equal(pg.x2.values, -gr.x1.values)
    # discrete mixed partials commute, so this holds to round-off everywhere
    assert np.abs(divergence(pg).values).max() < 1e-12


def test_laplacian_second_order():
    errs = []
    for n in (33, 65):
        g = make_grid(n, n, (0.0, 1.0, 0.0, 1.0))
        f = ScalarField2D.from_function(g, lambda x, y: np.sin(np.pi * x) * np.cos(np.pi * y))
        exact = -2.0 * np.pi ** 2 * f.values
        err = np.abs(laplacian(f).values - exact)[g.interior_mask()].max()
        errs.append(err)
    order = np.log2(errs[0] / errs[1])
    assert order > 1.9


def test_jacobian_antisymmetric_and_kills_functional_dependence():
    g = make_grid(17, 19, (-1.0, 1.0, -1.0, 1.0))
    a = ScalarField2D.from_function(g, lambda x, y: x + 2.0 * y)
    b = ScalarField2D.from_function(g, lambda x, y: np.exp(0.3 * x - y))
    jab = jacobian(a, b).values
    jba = jacobian(b, a).values
    assert np.allclose(jab, -jba, atol=1e-13)
    # b = f(a) for linear a: FD gradients of a are exact, so J vanishes
    fa = ScalarField2D(g, a.values ** 2)
    assert np.abs(jacobian(a, fa).values).max() < 1e-12


def test_bilinear_exact_on_bilinear_functions():
    g = make_grid(9, 7, (-1.0, 1.0, 0.0, 1.0))
    f = ScalarField2D.from_function(g, lambda x, y: 1.0 + 2.0 * x + 3.0 * y + 4.0 * x * y)
    xq = np.array([-0.93, -0.2, 0.0, 0.41, 0.999])
    yq = np.array([0.03, 0.5, 0.77, 0.2, 0.98])
    expect = 1.0 + 2.0 * xq + 3.0 * yq + 4.0 * xq * yq
    assert np.allclose(sample_bilinear(f, xq, yq), expect, atol=1e-13)


def test_bilinear_clamps_outside_queries_to_the_box():
    g = make_grid(6, 6, (0.0, 1.0, 0.0, 1.0))
    f = ScalarField2D.from_function(g, lambda x, y: x + 10.0 * y)
    assert sample_bilinear(f, -5.0, -3.0) == f.values[0, 0]
    assert sample_bilinear(f, 2.0, 9.0) == f.values[-1, -1]


@settings(deadline=None, max_examples=60)
@given(st.floats(-4.0, 4.0, allow_nan=False), st.floats(-4.0, 4.0, allow_nan=False))
def test_bilinear_is_range_preserving(xq, yq):
    g = make_grid(8, 8, (-1.0, 1.0, -1.0, 1.0))
    rng = np.random.default_rng(7)
    f = ScalarField2D(g, rng.uniform(-2.0, 5.0, (8, 8)))
    v = sample_bilinear(f, xq, yq)
    assert f.values.min() - 1e-12 <= v <= f.values.max() + 1e-12
