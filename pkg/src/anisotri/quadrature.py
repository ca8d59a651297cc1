"""Quadrature on triangles.

Rules are stored in barycentric form on the reference simplex with weights
summing to one, so that ``integral_T g ~ |T| * sum(w * g(L @ V))``.

Degree 8 uses the 16-point symmetric Dunavant rule.  Other degrees fall back
to a collapsed (Duffy) Gauss-Jacobi x Gauss-Legendre product rule, which is
exact for the requested degree but not symmetric.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


def _orbit3(a: float) -> list[tuple[float, float, float]]:
    b = 1.0 - 2.0 * a
    return [(b, a, a), (a, b, a), (a, a, b)]


def _orbit6(a: float, b: float) -> list[tuple[float, float, float]]:
    c = 1.0 - a - b
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


def _symmetric_rule(spec) -> tuple[np.ndarray, np.ndarray]:
    pts, wts = [], []
    for kind, args, w in spec:
        if kind == 1:
            orbit = [(1 / 3, 1 / 3, 1 / 3)]
        elif kind == 3:
            orbit = _orbit3(*args)
        else:
            orbit = _orbit6(*args)
        pts.extend(orbit)
        wts.extend([w] * len(orbit))
    return np.array(pts), np.array(wts)


# (orbit size, generator, weight) -- Dunavant (1985)
_SYMMETRIC = {
    1: [(1, (), 1.0)],
    2: [(3, (1 / 6,), 1 / 3)],
    8: [
        (1, (), 0.144315607677787),
        (3, (0.459292588292723,), 0.095091634267285),
        (3, (0.170569307751760,), 0.103217370534718),
        (3, (0.050547228317031,), 0.032458497623198),
        (6, (0.263112829634638, 0.008394777409958), 0.027230314174435),
    ],
}


def collapsed_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Conical product rule exact for polynomials of total degree ``degree``."""
    n = degree // 2 + 1
    # x-direction carries the (1 - s) Jacobian of the collapse
    s, ws = roots_jacobi(n, 1.0, 0.0)
    t, wt = roots_legendre(n)
    s = (s + 1.0) / 2.0
    ws = ws / 4.0
    t = (t + 1.0) / 2.0
    wt = wt / 2.0
    S, Tt = np.meshgrid(s, t, indexing="ij")
    W = np.outer(ws, wt)
    l1 = S.ravel()
    l2 = ((1.0 - S) * Tt).ravel()
    l0 = 1.0 - l1 - l2
    w = W.ravel()
    return np.column_stack([l0, l1, l2]), w / w.sum()


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric points ``(n, 3)`` and weights ``(n,)`` exact to ``degree``."""
    if degree < 0:
        raise ValueError("quadrature degree must be non-negative")
    if degree in _SYMMETRIC:
        L, w = _symmetric_rule(_SYMMETRIC[degree])
        w = w / w.sum()
    else:
        L, w = collapsed_rule(degree)
    L.setflags(write=False)
    w.setflags(write=False)
    return L, w


@lru_cache(maxsize=None)
def composite_rule(degree: int, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """``triangle_rule(degree)`` repeated on the 4**levels red-refined subtriangles."""
    L, w = triangle_rule(degree)
    if levels == 0:
        return L, w
    corners = [np.eye(3)]
    for _ in range(levels):
        nxt = []
        for C in corners:
            m01, m12, m20 = (C[0] + C[1]) / 2, (C[1] + C[2]) / 2, (C[2] + C[0]) / 2
            nxt += [
                np.array([C[0], m01, m20]),
                np.array([m01, C[1], m12]),
                np.array([m20, m12, C[2]]),
                np.array([m12, m20, m01]),
            ]
        corners = nxt
    pts = np.concatenate([L @ C for C in corners])
    wts = np.concatenate([w for _ in corners]) / len(corners)
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def clip_polygon(poly: np.ndarray, line: tuple[float, float, float]) -> tuple[np.ndarray, np.ndarray]:
    """Split a convex polygon by ``nx*x + ny*y = c`` into (below, above) parts."""
    nx, ny, c = line
    s = poly @ np.array([nx, ny]) - c
    below, above = [], []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        sp, sq = s[i], s[(i + 1) % n]
        if sp <= 0:
            below.append(p)
        if sp >= 0:
            above.append(p)
        if (sp < 0 < sq) or (sq < 0 < sp):
            r = p + (q - p) * (sp / (sp - sq))
            below.append(r)
            above.append(r)
    return np.array(below).reshape(-1, 2), np.array(above).reshape(-1, 2)


def _polygon_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def split_by_lines(verts: np.ndarray, lines) -> list[np.ndarray]:
    """Cut a triangle by straight lines; return sub-triangles as (3, 2) arrays."""
    pieces = [np.asarray(verts, dtype=float)]
    scale = max(_polygon_area(pieces[0]), 1e-300)
    for line in lines:
        nxt = []
        for poly in pieces:
            for part in clip_polygon(poly, line):
                if len(part) >= 3 and _polygon_area(part) > 1e-14 * scale:
                    nxt.append(part)
        pieces = nxt
    tris = []
    for poly in pieces:
        for k in range(1, len(poly) - 1):
            tri = np.array([poly[0], poly[k], poly[k + 1]])
            if _polygon_area(tri) > 1e-15 * scale:
                tris.append(tri)
    return tris


def triangle_points(verts: np.ndarray, degree: int = 8, lines=(), levels: int = 0):
    """Physical quadrature points and weights (summing to the area) on ``verts``.

    ``lines`` are straight lines across which the integrand may be non-smooth;
    the triangle is cut along them so that each piece is integrated separately.
    """
    verts = np.asarray(verts, dtype=float)
    L, w = composite_rule(degree, levels)
    if lines:
        pieces = [
            t
            for t in split_by_lines(verts, lines)
        ]
        if len(pieces) > 1:
            pts = np.concatenate([L @ t for t in pieces])
            wts = np.concatenate([w * _polygon_area(t) for t in pieces])
            return pts, wts
    area = _polygon_area(verts)
    return L @ verts, w * area


def integrate(g, verts, degree: int = 8, lines=(), levels: int = 0) -> float:
    """Integrate a vectorised ``g((n, 2) points)`` over a triangle."""
    pts, wts = triangle_points(verts, degree, lines, levels)
    return float(np.dot(wts, g(pts)))
