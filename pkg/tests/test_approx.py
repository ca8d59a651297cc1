import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anisotri.approx import (
    ApproxConfig,
    LocalPolynomial,
    UnsupportedSourceError,
    exponents,
    interpolate,
    interpolation_nodes,
    local_error,
    poly_dim,
    project,
)
from anisotri.geometry import REFERENCE_TRIANGLE, Triangle, bisect
from anisotri.quadrature import integrate, triangle_points
from anisotri.sources import Analytic, CounterexampleL2, PixelGrid, SharpTransition, pixels_in

from conftest import triangles
from oracles import l2_projection_p1

coef = st.floats(min_value=-5, max_value=5, allow_nan=False)


def poly_source(c):
    return Analytic(lambda x, y: c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y,
                    domain=(-3, 3, -3, 3))


def test_config_validation():
    assert ApproxConfig(m=2).dim == 6
    with pytest.raises(ValueError):
        ApproxConfig(p=0.5)
    with pytest.raises(ValueError):
        ApproxConfig(operator="bogus")
    with pytest.raises(ValueError):
        ApproxConfig(m=-1)


def test_exponents_count():
    for m in range(4):
        assert len(exponents(m)) == poly_dim(m) == (m + 1) * (m + 2) // 2


@given(triangles(), st.lists(coef, min_size=6, max_size=6), st.sampled_from([0, 1, 2]))
def test_projection_reproduces_polynomials(T, c, m):
    c = list(c)
    # keep only degree <= m terms
    for k in range(poly_dim(m), 6):
        c[k] = 0.0
    f = poly_source(c)
    cfg = ApproxConfig(m=m)
    rec = local_error(f, T, cfg)
    scale = 1 + sum(abs(v) for v in c) * (1 + T.diameter) ** 2
    assert rec.error <= 1e-12 * scale * math.sqrt(T.area)
    pts = T.points
    np.testing.assert_allclose(rec.poly(pts), f(pts), atol=1e-11 * scale)


@given(triangles(), st.lists(coef, min_size=6, max_size=6))
def test_projection_matches_gram_oracle(T, c):
    f = poly_source(c)
    p = project(f, T, ApproxConfig(m=1))
    ref = l2_projection_p1(f, T.points)
    pts = np.vstack([T.points, T.points.mean(axis=0)])
    B = np.column_stack([np.ones(len(pts)), pts])
    np.testing.assert_allclose(p(pts), B @ ref, atol=1e-9 * (1 + np.abs(ref).sum()))


def test_projection_of_x_squared_on_reference_against_high_order_oracle():
    f = Analytic(lambda x, y: x * x)
    p = project(f, REFERENCE_TRIANGLE, ApproxConfig(m=1))
    ref = l2_projection_p1(f, REFERENCE_TRIANGLE.points, n=40)
    pts = REFERENCE_TRIANGLE.points
    np.testing.assert_allclose(p(pts), np.column_stack([np.ones(3), pts]) @ ref, atol=1e-13)


@given(triangles(), st.lists(coef, min_size=6, max_size=6))
def test_residual_is_orthogonal_to_p1(T, c):
    f = Analytic(lambda x, y: np.sin(x * c[0]) + c[1] * x * y**2 + np.exp(0.3 * y), domain=(-3, 3, -3, 3))
    p = project(f, T, ApproxConfig(m=1))
    # orthogonality holds exactly for the discrete inner product of the rule
    q, w = triangle_points(T.points, 8)
    r = f(q) - p(q)
    scale = np.sqrt(np.dot(w, f(q) ** 2)) * np.sqrt(T.area) * (1 + T.diameter)
    for v in (np.ones(len(q)), q[:, 0], q[:, 1]):
        assert abs(np.dot(w, r * v)) <= 1e-12 * (scale + 1)


def test_projection_vanishes_on_pattern_triangles():
    f = CounterexampleL2()
    for xs in [(0, 0.5, 1), (0, 1, 1), (0.5, 1, 1)]:
        T = Triangle(tuple(zip(xs, (0.1, 0.9, 0.3))))
        rec = local_error(f, T, ApproxConfig())
        assert np.abs(rec.poly.coeffs).max() < 1e-9
        # f^2 is a piecewise sextic: exact under a degree-12 rule split at x = 1/2
        norm2 = integrate(lambda q: f(q) ** 2, T.points, 12, lines=f.breaklines)
        assert rec.error == pytest.approx(math.sqrt(norm2), rel=1e-9)


def test_interpolation_nodes_and_exactness():
    T = Triangle(((0, 0), (2, 0), (0, 1)))
    assert len(interpolation_nodes(T, 2)) == 6
    f = Analytic(lambda x, y: 1 + 2 * x - y + x * y, domain=(-3, 3, -3, 3))
    cfg = ApproxConfig(m=2, operator="interpolation")
    p = interpolate(f, T, cfg)
    nodes = interpolation_nodes(T, 2)
    np.testing.assert_allclose(p(nodes), f(nodes), atol=1e-13)
    assert local_error(f, T, cfg).error < 1e-12


def test_interpolation_rejects_pixels():
    with pytest.raises(UnsupportedSourceError):
        interpolate(PixelGrid(np.zeros((4, 4))), REFERENCE_TRIANGLE, ApproxConfig(operator="interpolation"))


def test_sup_error_of_interp_counterexample():
    # I_T f = 0 for sin(2 pi x) with vertices on x in {0, 1/2, 1}, so e_inf = max |f|
    f = Analytic(lambda x, y: np.sin(2 * np.pi * x))
    T = Triangle(((0, 0), (1, 0), (1, 1)))
    rec = local_error(f, T, ApproxConfig(p=math.inf, operator="interpolation"))
    assert rec.error == pytest.approx(1.0, abs=2e-2)


@given(triangles(), st.sampled_from([1.0, 2.0, 3.0, math.inf]))
def test_error_is_nonnegative_and_norm_ordered(T, p):
    f = SharpTransition(0.2, domain=(-3, 3, -3, 3))
    e = local_error(f, T, ApproxConfig(p=p)).error
    assert e >= 0.0
    if math.isinf(p):
        assert e >= local_error(f, T, ApproxConfig(p=2.0)).error / math.sqrt(T.area) - 1e-12


def test_pixel_projection_is_discrete_least_squares():
    rng = np.random.default_rng(3)
    img = rng.uniform(0, 1, (16, 16))
    f = PixelGrid(img)
    T = Triangle(((0.1, 0.1), (0.9, 0.2), (0.4, 0.8)))
    idx = pixels_in(f, T)
    rec = local_error(f, T, ApproxConfig())
    B = np.column_stack([np.ones(len(idx)), f.centers[idx]])
    c, *_ = np.linalg.lstsq(B, f.values[idx], rcond=None)
    assert rec.error == pytest.approx(np.linalg.norm(f.values[idx] - B @ c), rel=1e-10)
    assert rec.n_samples == len(idx)


def test_pixel_triangle_with_too_few_pixels_has_zero_error():
    f = PixelGrid(np.random.default_rng(0).uniform(size=(4, 4)))
    # pixel centres sit at odd multiples of 1/8; this triangle holds exactly (0.375, 0.375)
    T = Triangle(((0.3, 0.3), (0.5, 0.3), (0.3, 0.5)))
    rec = local_error(f, T, ApproxConfig())
    assert rec.n_samples == 1 and rec.error == 0.0


def test_local_polynomial_zero():
    p = LocalPolynomial.zero(REFERENCE_TRIANGLE, 2)
    assert np.all(p(np.random.default_rng(0).uniform(size=(5, 2))) == 0)


def test_nestedness_single_case():
    f = SharpTransition(0.1)
    T = Triangle(((0.5, 0.5), (1.1, 0.6), (0.7, 1.05)))
    e = local_error(f, T, ApproxConfig()).error
    for a in range(3):
        c1, c2 = bisect(T, a)
        e1, e2 = (local_error(f, c, ApproxConfig()).error for c in (c1, c2))
        assert e1**2 + e2**2 <= e**2 + 1e-10
