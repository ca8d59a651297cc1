import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anisotri.geometry import (
    EDGE_APEX,
    REFERENCE_TRIANGLE,
    DegenerateTriangleError,
    QuadraticForm,
    SingularFormError,
    Triangle,
    abs_form,
    affine_image,
    bisect,
    edge_vectors,
    equilateral,
    rectangle_split,
    rho_q,
)

from conftest import random_triangle, triangles
from oracles import rho_equilateral_image, shoelace

apexes = st.integers(min_value=0, max_value=2)


def test_reference_triangle_area_and_diameter():
    assert REFERENCE_TRIANGLE.area == pytest.approx(0.5)
    assert REFERENCE_TRIANGLE.diameter == pytest.approx(math.sqrt(2.0))


def test_edge_vectors_sum_to_zero_and_letters():
    T = Triangle(((0, 0), (2, 0), (0, 1)))
    a, b, c = edge_vectors(T)
    np.testing.assert_allclose(a + b + c, 0.0)
    np.testing.assert_allclose(a, (2, 0))
    # the split edge is opposite the apex vertex
    for letter, apex in EDGE_APEX.items():
        c1, c2 = bisect(T, letter)
        assert (c1.vertices, c2.vertices) == tuple(t.vertices for t in bisect(T, apex))


def test_default_newest_is_opposite_longest_edge():
    T = Triangle(((0, 0), (3, 0), (0, 1)))
    assert T.newest == 0


def test_bisect_reference_from_origin():
    c1, c2 = bisect(REFERENCE_TRIANGLE, 0)
    mids = {v for c in (c1, c2) for v in c.vertices} - set(REFERENCE_TRIANGLE.vertices)
    assert mids == {(1.0, 0.5)}
    assert c1.area == c2.area == pytest.approx(0.25)


def test_degenerate_triangle_rejected():
    T = Triangle(((0, 0), (1, 1), (2, 2)))
    assert not T.is_valid()
    with pytest.raises(DegenerateTriangleError):
        bisect(T, 0)
    with pytest.raises(ValueError):
        bisect(REFERENCE_TRIANGLE, 3)


@given(triangles(), apexes)
def test_bisection_halves_area_and_keeps_orientation(T, apex):
    c1, c2 = bisect(T, apex)
    assert c1.area == pytest.approx(T.area / 2, rel=1e-12)
    assert c2.area == pytest.approx(T.area / 2, rel=1e-12)
    assert shoelace(c1.points) + shoelace(c2.points) == pytest.approx(shoelace(T.points), rel=1e-12)
    assert np.sign(c1.signed_area) == np.sign(T.signed_area) == np.sign(c2.signed_area)
    # newest vertex of each child is the new midpoint
    v = T.points
    mid = (v[(apex + 1) % 3] + v[(apex + 2) % 3]) / 2
    for c in (c1, c2):
        np.testing.assert_allclose(c.points[c.newest], mid)
        assert c.level == T.level + 1


def _bnn(T, first):
    gen = list(bisect(T, first))
    for _ in range(2):
        gen = [c for t in gen for c in bisect(t, t.newest)]
    return gen


@given(triangles(), apexes)
def test_bnn_sequence_halves_diameter(T, first):
    assert max(t.diameter for t in _bnn(T, first)) <= (0.5 + 1e-12) * T.diameter


def test_bnn_on_1000_random_triangles(rng):
    worst = 0.0
    for _ in range(1000):
        T = random_triangle(rng)
        for first in range(3):
            worst = max(worst, max(t.diameter for t in _bnn(T, first)) / T.diameter)
    assert worst <= 0.5 + 1e-12


def test_equilateral_rho_is_minimal():
    q = QuadraticForm(1.0, 0.0, 1.0)
    assert rho_q(equilateral(), q) == pytest.approx(4 / math.sqrt(3))


@given(triangles(), st.floats(0.1, 10), st.floats(-0.9, 0.9), st.floats(0.1, 10))
def test_rho_q_matches_definition_and_lower_bound(T, a, c, b):
    q = QuadraticForm(a, c * math.sqrt(a * b), b)
    r = rho_q(T, q)
    assert r == pytest.approx(rho_equilateral_image(q.matrix, T.points), rel=1e-10)
    assert r >= 4 / math.sqrt(3) * (1 - 1e-9)


@given(triangles(), st.floats(0.2, 5), st.floats(-np.pi, np.pi))
def test_rho_q_affine_invariance(T, s, angle):
    # rho_q(T) = rho_{q o A^{-1}}(A T)
    q = QuadraticForm(1.0, 0.3, 2.0)
    R = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    A = R @ np.diag([s, 1.0 / s + 0.5])
    Ainv = np.linalg.inv(A)
    qA = QuadraticForm.from_matrix(Ainv.T @ q.matrix @ Ainv)
    assert rho_q(affine_image(T, A), qA) == pytest.approx(rho_q(T, q), rel=1e-8)


def test_abs_form_of_mixed_signature():
    q = QuadraticForm(1.0, 0.0, -10.0)
    aq = abs_form(q)
    np.testing.assert_allclose(aq.matrix, np.diag([1.0, 10.0]), atol=1e-14)
    pd = QuadraticForm(2.0, 0.5, 1.0)
    np.testing.assert_allclose(abs_form(pd).matrix, pd.matrix, atol=1e-14)


def test_null_cone_triangle_stays_well_adapted():
    # a long thin triangle along a null direction of q = x^2 - y^2 keeps rho_q bounded
    q = QuadraticForm(1.0, 0.0, -1.0)
    for L in (10.0, 100.0, 1000.0):
        T = Triangle(((0, 0), (L, L), (L + 1 / L, L - 1 / L)))
        assert rho_q(T, q) < 10.0


def test_singular_form_raises():
    with pytest.raises(SingularFormError):
        rho_q(REFERENCE_TRIANGLE, QuadraticForm(1.0, 0.0, 0.0))


def test_rectangle_split_covers_rectangle():
    D0 = rectangle_split(0, 2, 0, 1)
    assert sum(t.area for t in D0) == pytest.approx(2.0)
    assert [t.id for t in D0] == [0, 1]
