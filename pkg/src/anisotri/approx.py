"""Local polynomial approximation on a triangle and the local error e_T(f)_p.

Continuous sources are handled by quadrature; pixel grids by exact discrete
least squares over the pixel set of the triangle.  Both reduce to weighted
samples ``(points, weights)`` so the fitting code is shared.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Triangle
from .quadrature import composite_rule, triangle_points
from .sources import FunctionSource, pixels_in

PROJECTION = "projection"
INTERPOLATION = "interpolation"

# errors below this fraction of ||f||_{L^p(T)} are rounding noise and count as 0
ZERO_RTOL = 1e-12


class UnsupportedSourceError(TypeError):
    pass


@dataclass(frozen=True)
class ApproxConfig:
    m: int = 1
    p: float = 2.0
    operator: str = PROJECTION
    quadrature_order: int = 8
    # each level splits the quadrature reference triangle into 4
    quadrature_levels: int = 0

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("polynomial degree must be >= 0")
        if not (self.p >= 1):
            raise ValueError("error exponent p must lie in [1, inf]")
        if self.operator not in (PROJECTION, INTERPOLATION):
            raise ValueError(f"unknown operator {self.operator!r}")
        if self.quadrature_order < 1:
            raise ValueError("quadrature_order must be positive")

    @property
    def dim(self) -> int:
        return poly_dim(self.m)


def poly_dim(m: int) -> int:
    return (m + 1) * (m + 2) // 2


def exponents(m: int) -> list[tuple[int, int]]:
    return [(d - j, j) for d in range(m + 1) for j in range(d + 1)]


@dataclass(frozen=True)
class LocalPolynomial:
    """Polynomial in ``((x - cx) / h, (y - cy) / h)`` monomials."""

    degree: int
    center: tuple[float, float]
    scale: float
    coeffs: np.ndarray

    def __call__(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return basis_matrix(pts, self.center, self.scale, self.degree) @ self.coeffs

    @classmethod
    def zero(cls, T: Triangle, m: int) -> "LocalPolynomial":
        return cls(m, T.barycenter, T.diameter, np.zeros(poly_dim(m)))


def basis_matrix(pts: np.ndarray, center, scale: float, m: int) -> np.ndarray:
    u = (pts[:, 0] - center[0]) / scale
    v = (pts[:, 1] - center[1]) / scale
    if m == 1:
        return np.column_stack([np.ones_like(u), u, v])
    if m == 0:
        return np.ones((len(u), 1))
    return np.column_stack([u**i * v**j for i, j in exponents(m)])


@dataclass(frozen=True)
class ErrorRecord:
    id: int
    error: float
    poly: LocalPolynomial
    n_samples: int = 0


def samples(f: FunctionSource, T: Triangle, cfg: ApproxConfig, pixels=None):
    """Points and weights representing the (continuous or discrete) measure on T."""
    if f.is_pixel:
        idx = pixels_in(f, T) if pixels is None else pixels
        return f.centers[idx], np.ones(len(idx)), f.values[idx]
    pts, w = triangle_points(T.points, cfg.quadrature_order, f.breaklines, cfg.quadrature_levels)
    return pts, w, f(pts)


def _fit_projection(pts, w, vals, T: Triangle, m: int) -> LocalPolynomial:
    center, scale = T.barycenter, T.diameter
    B = basis_matrix(pts, center, scale, m)
    sw = np.sqrt(w)
    # rank-revealing least squares; minimal-norm when underdetermined
    c, *_ = np.linalg.lstsq(B * sw[:, None], vals * sw, rcond=None)
    return LocalPolynomial(m, center, scale, c)


def project(f: FunctionSource, T: Triangle, cfg: ApproxConfig, pixels=None) -> LocalPolynomial:
    """L2(T)-orthogonal projection onto polynomials of degree ``cfg.m``.

    For pixel grids this is the l2 projection over the pixel set of ``T``.
    """
    pts, w, vals = samples(f, T, cfg, pixels)
    if len(pts) == 0:
        return LocalPolynomial.zero(T, cfg.m)
    return _fit_projection(pts, w, vals, T, cfg.m)


def interpolation_nodes(T: Triangle, m: int) -> np.ndarray:
    """Principal lattice ``sum k_i/m v_i``; the barycentre when m = 0."""
    V = T.points
    if m == 0:
        return V.mean(axis=0, keepdims=True)
    nodes = []
    for k0 in range(m, -1, -1):
        for k1 in range(m - k0, -1, -1):
            k2 = m - k0 - k1
            nodes.append((k0 * V[0] + k1 * V[1] + k2 * V[2]) / m)
    return np.array(nodes)


def interpolate(f: FunctionSource, T: Triangle, cfg: ApproxConfig) -> LocalPolynomial:
    """Lagrange interpolant on the principal lattice of ``T``."""
    if f.is_pixel:
        raise UnsupportedSourceError("interpolation needs a point-evaluable source")
    nodes = interpolation_nodes(T, cfg.m)
    center, scale = T.barycenter, T.diameter
    B = basis_matrix(nodes, center, scale, cfg.m)
    c = np.linalg.solve(B, f(nodes))
    return LocalPolynomial(cfg.m, center, scale, c)


def approximate(f: FunctionSource, T: Triangle, cfg: ApproxConfig, pixels=None) -> LocalPolynomial:
    if cfg.operator == INTERPOLATION:
        return interpolate(f, T, cfg)
    return project(f, T, cfg, pixels)


def _sup_points(T: Triangle, cfg: ApproxConfig) -> np.ndarray:
    V = T.points
    mids = (V + np.roll(V, -1, axis=0)) / 2.0
    return np.vstack([V, mids])


def local_error(f: FunctionSource, T: Triangle, cfg: ApproxConfig, pixels=None) -> ErrorRecord:
    """``e_T(f)_p = ||f - A_T f||_{L^p(T)}`` and the approximant used.

    For ``p = inf`` the sup is taken over the quadrature nodes, vertices and
    edge midpoints, which only bounds the true sup from below.  For pixel
    grids the norm is the discrete l^p norm over the pixel set; triangles
    with fewer pixels than ``dim(Pi_m)`` get error 0.  Errors below
    ``ZERO_RTOL`` times the norm of ``f`` on ``T`` are reported as 0.
    """
    pts, w, vals = samples(f, T, cfg, pixels)
    n = len(pts)
    if f.is_pixel and n < cfg.dim:
        poly = _fit_projection(pts, w, vals, T, cfg.m) if n else LocalPolynomial.zero(T, cfg.m)
        return ErrorRecord(T.id, 0.0, poly, n)
    if cfg.operator == INTERPOLATION:
        poly = interpolate(f, T, cfg)
    else:
        poly = _fit_projection(pts, w, vals, T, cfg.m)
    r = np.abs(vals - poly(pts))
    p = cfg.p
    if math.isinf(p):
        err = float(r.max()) if n else 0.0
        size = float(np.abs(vals).max()) if n else 0.0
        if not f.is_pixel:
            extra = _sup_points(T, cfg)
            err = max(err, float(np.abs(f(extra) - poly(extra)).max()))
    else:
        err = _weighted_norm(w, r, p)
        size = _weighted_norm(w, np.abs(vals), p)
    if err <= ZERO_RTOL * size:
        err = 0.0
    return ErrorRecord(T.id, err, poly, n)


def _weighted_norm(w, a, p: float) -> float:
    if p == 2:
        return math.sqrt(float(np.dot(w, a * a)))
    return float(np.dot(w, a**p)) ** (1.0 / p)


def lp_norm(g, T: Triangle, p: float, cfg: ApproxConfig | None = None) -> float:
    """``||g||_{L^p(T)}`` by quadrature for a vectorised callable ``g``."""
    cfg = cfg or ApproxConfig()
    pts, w = triangle_points(T.points, cfg.quadrature_order, (), cfg.quadrature_levels)
    vals = np.abs(g(pts))
    if math.isinf(p):
        return float(max(vals.max(), np.abs(g(_sup_points(T, cfg))).max()))
    return float(np.dot(w, vals**p)) ** (1.0 / p)


def quadrature_size(cfg: ApproxConfig) -> int:
    return len(composite_rule(cfg.quadrature_order, cfg.quadrature_levels)[1])
