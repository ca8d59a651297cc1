"""Target functions: analytic fields, quadratic forms, the sharp transition
family, oscillatory counterexamples and pixel grids.

Every source is called on an ``(n, 2)`` array of points and returns ``(n,)``
values.  Sources that are only piecewise smooth along straight lines expose
them through ``breaklines`` so that quadrature can cut triangles along them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import QuadraticForm, Triangle

Domain = tuple[float, float, float, float]  # x0, x1, y0, y1

UNIT_SQUARE: Domain = (0.0, 1.0, 0.0, 1.0)
# The quarter-annulus transition sits near r = 1; this square contains it
# whole for delta <= 0.1.
SHARP_TRANSITION_DOMAIN: Domain = (0.0, 1.1, 0.0, 1.1)


class OutsideDomainError(ValueError):
    pass


class FunctionSource:
    """Base class.  Subclasses implement ``__call__`` on point arrays."""

    domain: Domain = UNIT_SQUARE
    breaklines: tuple[tuple[float, float, float], ...] = ()
    is_pixel = False

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian(self, pts: np.ndarray) -> np.ndarray:
        """``(n, 2, 2)`` Hessians, where an analytic one is available."""
        raise NotImplementedError(f"{type(self).__name__} has no analytic Hessian")

    def contains(self, pts: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        x0, x1, y0, y1 = self.domain
        pts = np.atleast_2d(pts)
        s = tol * max(x1 - x0, y1 - y0)
        return (pts[:, 0] >= x0 - s) & (pts[:, 0] <= x1 + s) & (pts[:, 1] >= y0 - s) & (pts[:, 1] <= y1 + s)


def evaluate(f: FunctionSource, p) -> float:
    """Value of ``f`` at a single point of its domain."""
    if f.is_pixel:
        raise TypeError("pixel grids are sampled over pixel sets, not point-evaluated")
    pt = np.asarray(p, dtype=float).reshape(1, 2)
    if not f.contains(pt)[0]:
        raise OutsideDomainError(f"point {tuple(pt[0])} outside domain {f.domain}")
    return float(f(pt)[0])


@dataclass(frozen=True, eq=False)
class Analytic(FunctionSource):
    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    domain: Domain = UNIT_SQUARE
    breaklines: tuple = ()

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.broadcast_to(np.asarray(self.func(pts[:, 0], pts[:, 1]), dtype=float), (len(pts),))


@dataclass(frozen=True, eq=False)
class Quadratic(FunctionSource):
    q: QuadraticForm
    domain: Domain = (-1.0, 1.0, -1.0, 1.0)

    def __call__(self, pts):
        return self.q(np.asarray(pts, dtype=float))

    def hessian(self, pts):
        return np.broadcast_to(self.q.hessian(), (len(pts), 2, 2))


def sharp_transition_quintic(delta: float) -> np.ndarray:
    """Coefficients ``c`` with ``g(1 + delta*t) = sum_k c[k] t**k`` on ``t in [0, 1]``.

    Matches value, first and second derivative of the inner branch at r=1
    and of the outer branch at r=1+delta.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    # (value, d/dr, d2/dr2) at both ends
    left = (1.0, -0.5, -0.5)
    right = (-1.0, -0.5, 0.5)
    A = np.zeros((6, 6))
    rhs = np.zeros(6)
    k = np.arange(6)
    for row, (t, vals) in enumerate(((0.0, left), (1.0, right))):
        A[3 * row] = t**k
        A[3 * row + 1] = np.where(k >= 1, k * t ** np.maximum(k - 1, 0), 0.0)
        A[3 * row + 2] = np.where(k >= 2, k * (k - 1) * t ** np.maximum(k - 2, 0), 0.0)
        rhs[3 * row : 3 * row + 3] = (vals[0], vals[1] * delta, vals[2] * delta**2)
    return np.linalg.solve(A, rhs)


@dataclass(frozen=True, eq=False)
class SharpTransition(FunctionSource):
    """``f(x, y) = g(sqrt(x^2 + y^2))`` with a C^2 quintic drop of width ``delta``."""

    delta: float
    domain: Domain = SHARP_TRANSITION_DOMAIN
    coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", sharp_transition_quintic(self.delta))

    def g(self, r, deriv: int = 0) -> np.ndarray:
        """Radial profile or its first/second derivative."""
        r = np.asarray(r, dtype=float)
        d = self.delta
        c = np.polynomial.Polynomial(self.coeffs)
        t = (r - 1.0) / d
        s = r - 1.0 - d
        if deriv == 0:
            inner, mid, outer = (5.0 - r * r) / 4.0, c(t), -(5.0 - (1.0 - s) ** 2) / 4.0
        elif deriv == 1:
            inner, mid, outer = -r / 2.0, c.deriv(1)(t) / d, -(1.0 - s) / 2.0
        elif deriv == 2:
            inner, mid, outer = np.full_like(r, -0.5), c.deriv(2)(t) / d**2, np.full_like(r, 0.5)
        else:
            raise ValueError("deriv must be 0, 1 or 2")
        return np.where(r <= 1.0, inner, np.where(r <= 1.0 + d, mid, outer))

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        return self.g(np.hypot(pts[:, 0], pts[:, 1]))

    def hessian(self, pts):
        pts = np.asarray(pts, dtype=float)
        r = np.hypot(pts[:, 0], pts[:, 1])
        g1, g2 = self.g(r, 1), self.g(r, 2)
        safe = np.where(r > 0, r, 1.0)
        ux = np.where(r > 0, pts[:, 0] / safe, 1.0)
        uy = pts[:, 1] / safe
        tang = np.where(r > 0, g1 / safe, g2)
        H = np.empty((len(pts), 2, 2))
        # radial eigenvalue g'' along u, tangential g'/r across
        H[:, 0, 0] = g2 * ux * ux + tang * uy * uy
        H[:, 1, 1] = g2 * uy * uy + tang * ux * ux
        H[:, 0, 1] = H[:, 1, 0] = (g2 - tang) * ux * uy
        return H

    def hessian_signature(self, pts) -> np.ndarray:
        """-1 negative definite, +1 positive definite, 0 mixed or degenerate."""
        H = self.hessian(pts)
        lam = np.linalg.eigvalsh(H)
        return np.where(lam[:, 1] < 0, -1, np.where(lam[:, 0] > 0, 1, 0))


def build_sharp_transition(delta: float, domain: Domain = SHARP_TRANSITION_DOMAIN) -> SharpTransition:
    return SharpTransition(delta, domain)


@dataclass(frozen=True, eq=False)
class CounterexampleInterp(FunctionSource):
    """``sin(2 pi m x)``: vanishes on every line ``x = k / (2m)``."""

    m: int = 1
    domain: Domain = UNIT_SQUARE

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("degree m must be >= 1")

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        return np.sin(2.0 * math.pi * self.m * pts[:, 0])


def build_counterexample_interp(m: int) -> CounterexampleInterp:
    return CounterexampleInterp(m)


def legendre_u(x) -> np.ndarray:
    """``L_3(4x - 1)``: orthogonal to 1, x, x^2 on [0, 1/2]."""
    x = np.asarray(x, dtype=float)
    return ((160.0 * x - 120.0) * x + 24.0) * x - 1.0


@dataclass(frozen=True, eq=False)
class CounterexampleL2(FunctionSource):
    """``u(x)`` on [0, 1/2] repeated on (1/2, 1]; orthogonal to P1 on the
    triangles that defeat the L2 decision function."""

    domain: Domain = UNIT_SQUARE
    breaklines: tuple = ((1.0, 0.0, 0.5),)

    def __call__(self, pts):
        x = np.asarray(pts, dtype=float)[:, 0]
        return legendre_u(np.where(x <= 0.5, x, x - 0.5))


def build_counterexample_l2() -> CounterexampleL2:
    return CounterexampleL2()


class PixelGrid(FunctionSource):
    """Grey-level image on [0, 1]^2.

    Row 0 is the top of the image; pixel ``(i, j)`` has centre
    ``((j + 1/2) / W, 1 - (i + 1/2) / H)``.  Pixel index ``k = i * W + j``.
    """

    is_pixel = True
    domain = UNIT_SQUARE

    def __init__(self, image):
        img = np.asarray(image, dtype=float)
        if img.ndim != 2 or img.size == 0:
            raise ValueError("pixel grid needs a non-empty 2-D array")
        self.image = img
        self.height, self.width = img.shape
        self.values = img.ravel()
        jj, ii = np.meshgrid(np.arange(self.width), np.arange(self.height))
        self.centers = np.column_stack(
            [((jj + 0.5) / self.width).ravel(), (1.0 - (ii + 0.5) / self.height).ravel()]
        )

    @classmethod
    def from_uint8(cls, data) -> "PixelGrid":
        return cls(np.asarray(data, dtype=float) / 255.0)

    def __call__(self, pts):
        """Piecewise-constant lookup: value of the pixel covering each point."""
        pts = np.asarray(pts, dtype=float)
        j = np.clip(np.floor(pts[:, 0] * self.width).astype(int), 0, self.width - 1)
        i = np.clip(np.floor((1.0 - pts[:, 1]) * self.height).astype(int), 0, self.height - 1)
        return self.image[i, j]

    def index_box(self, T: Triangle) -> np.ndarray:
        """Indices of pixels whose centres fall in the bounding box of ``T``."""
        p = T.points
        j0 = max(int(math.floor(p[:, 0].min() * self.width - 0.5)), 0)
        j1 = min(int(math.ceil(p[:, 0].max() * self.width - 0.5)), self.width - 1)
        i0 = max(int(math.floor((1.0 - p[:, 1].max()) * self.height - 0.5)), 0)
        i1 = min(int(math.ceil((1.0 - p[:, 1].min()) * self.height - 0.5)), self.height - 1)
        if j1 < j0 or i1 < i0:
            return np.empty(0, dtype=np.int64)
        ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1), indexing="ij")
        return (ii * self.width + jj).ravel()


def in_closed_triangle(pts: np.ndarray, T: Triangle, tol: float = 1e-12) -> np.ndarray:
    """Mask of points inside or on the boundary of ``T``."""
    p = T.points
    v0 = p[0]
    e1, e2 = p[1] - v0, p[2] - v0
    det = e1[0] * e2[1] - e1[1] * e2[0]
    d = pts - v0
    l1 = (d[:, 0] * e2[1] - d[:, 1] * e2[0]) / det
    l2 = (e1[0] * d[:, 1] - e1[1] * d[:, 0]) / det
    l0 = 1.0 - l1 - l2
    return (l0 >= -tol) & (l1 >= -tol) & (l2 >= -tol)


def pixels_in(f: PixelGrid, T: Triangle, candidates: np.ndarray | None = None) -> np.ndarray:
    """Pixels of ``candidates`` (default: all) whose centres lie in closed ``T``."""
    if not f.is_pixel:
        raise TypeError("pixels_in needs a PixelGrid source")
    idx = f.index_box(T) if candidates is None else np.asarray(candidates)
    if idx.size == 0:
        return idx.astype(np.int64)
    return idx[in_closed_triangle(f.centers[idx], T)]


def split_pixels(f: PixelGrid, parent_pixels: np.ndarray, first: Triangle) -> tuple[np.ndarray, np.ndarray]:
    """Share a parent's pixels between its two children.

    Boundary pixels go to ``first`` (the child with the smaller id); every
    parent pixel lands in exactly one child.
    """
    mask = in_closed_triangle(f.centers[parent_pixels], first)
    return parent_pixels[mask], parent_pixels[~mask]


def assign_root_pixels(f: PixelGrid, roots: list[Triangle]) -> list[np.ndarray]:
    """Pixel sets of the root triangles; ties go to the smallest root id."""
    taken = np.zeros(f.values.size, dtype=bool)
    out: list[np.ndarray | None] = [None] * len(roots)
    for k in sorted(range(len(roots)), key=lambda k: roots[k].id):
        idx = pixels_in(f, roots[k])
        idx = idx[~taken[idx]]
        taken[idx] = True
        out[k] = idx
    return out  # type: ignore[return-value]
