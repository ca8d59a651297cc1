"""Triangle primitives: edges, bisection, areas, and quadratic-form shape quality.

Vertices are stored as an ordered triple.  Edge vectors follow the fixed
convention ``a = v2 - v1, b = v3 - v2, c = v1 - v3`` so that ``a + b + c = 0``.
A bisection is identified by the index (0, 1 or 2) of the vertex it starts
from; the split edge is the one opposite that vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Edge letter -> index of the vertex opposite that edge, under the
# a = v2 - v1, b = v3 - v2, c = v1 - v3 convention.
EDGE_APEX = {"a": 2, "b": 0, "c": 1}
APEX_EDGE = {v: k for k, v in EDGE_APEX.items()}


class DegenerateTriangleError(ValueError):
    pass


class SingularFormError(ValueError):
    pass


@dataclass(frozen=True)
class Triangle:
    """An immutable triangle node.

    ``newest`` is the index of the most recently created vertex, ``id`` a
    node identifier (``-1`` for free-standing triangles) and ``level`` the
    depth in a bisection hierarchy.
    """

    vertices: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]
    newest: int = -1
    id: int = -1
    level: int = 0
    _arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) != 3:
            raise ValueError("a triangle needs exactly three vertices")
        object.__setattr__(self, "vertices", verts)
        arr = np.array(verts, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "_arr", arr)
        if not np.all(np.isfinite(arr)):
            raise ValueError("vertex coordinates must be finite")
        if self.newest == -1:
            object.__setattr__(self, "newest", _opposite_longest(arr))
        elif self.newest not in (0, 1, 2):
            raise ValueError(f"newest vertex index must be 0, 1 or 2, got {self.newest}")

    @property
    def points(self) -> np.ndarray:
        """(3, 2) read-only array of vertex coordinates."""
        return self._arr

    @property
    def signed_area(self) -> float:
        return signed_area(self._arr)

    @property
    def area(self) -> float:
        return abs(signed_area(self._arr))

    @property
    def diameter(self) -> float:
        return diameter(self)

    @property
    def barycenter(self) -> tuple[float, float]:
        return barycenter(self)

    def is_valid(self, rtol: float = 1e-14) -> bool:
        """True if the triangle is non-degenerate relative to its size."""
        d = self.diameter
        return d > 0 and self.area > rtol * d * d

    def with_id(self, id: int, level: int | None = None) -> "Triangle":
        return Triangle(self.vertices, self.newest, id, self.level if level is None else level)


def _opposite_longest(arr: np.ndarray) -> int:
    # edge opposite vertex i joins vertices i+1 and i+2
    lengths = [np.hypot(*(arr[(i + 2) % 3] - arr[(i + 1) % 3])) for i in range(3)]
    return int(np.argmax(lengths))


def signed_area(pts: np.ndarray) -> float:
    (x0, y0), (x1, y1), (x2, y2) = pts
    return 0.5 * ((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))


def area(T: Triangle) -> float:
    return T.area


def diameter(T: Triangle) -> float:
    """Length of the longest edge."""
    p = T.points
    return float(max(math.hypot(*(p[1] - p[0])), math.hypot(*(p[2] - p[1])), math.hypot(*(p[0] - p[2]))))


def barycenter(T: Triangle) -> tuple[float, float]:
    c = T.points.mean(axis=0)
    return float(c[0]), float(c[1])


def edge_vectors(T: Triangle) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return the edge vectors ``(a, b, c)`` with ``a + b + c = 0``."""
    if not T.is_valid():
        raise DegenerateTriangleError(f"degenerate triangle {T.vertices}")
    v1, v2, v3 = T.points
    return v2 - v1, v3 - v2, v1 - v3


def bisect(T: Triangle, apex: int | str) -> tuple[Triangle, Triangle]:
    """Split ``T`` from vertex ``apex`` to the midpoint of the opposite edge.

    ``apex`` is a vertex index or an edge letter (``"a"``, ``"b"``, ``"c"``).
    Both children keep the parent's orientation, have their ``newest`` index
    on the new midpoint and sit one level deeper.  The first child is the one
    holding the lexicographically smaller of the two non-apex vertices.
    Children inherit ``id=-1``; the caller assigns ids.
    """
    if isinstance(apex, str):
        apex = EDGE_APEX[apex]
    if apex not in (0, 1, 2):
        raise ValueError(f"apex must be 0, 1 or 2, got {apex!r}")
    if not T.is_valid():
        raise DegenerateTriangleError(f"degenerate triangle {T.vertices}")
    i, j, k = apex, (apex + 1) % 3, (apex + 2) % 3
    v = T.vertices
    mid = ((v[j][0] + v[k][0]) / 2.0, (v[j][1] + v[k][1]) / 2.0)

    # child holding v[j]: replace v[k] by the midpoint; and vice versa
    verts_j = list(v)
    verts_j[k] = mid
    verts_k = list(v)
    verts_k[j] = mid
    child_j = Triangle(tuple(verts_j), newest=k, level=T.level + 1)
    child_k = Triangle(tuple(verts_k), newest=j, level=T.level + 1)
    if v[j] <= v[k]:
        return child_j, child_k
    return child_k, child_j


def newest_vertex_bisect(T: Triangle) -> tuple[Triangle, Triangle]:
    return bisect(T, T.newest)


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric form ``q(x, y) = q11 x^2 + 2 q12 x y + q22 y^2``."""

    q11: float
    q12: float
    q22: float

    @classmethod
    def from_matrix(cls, Q) -> "QuadraticForm":
        Q = np.asarray(Q, dtype=float)
        return cls(float(Q[0, 0]), float(0.5 * (Q[0, 1] + Q[1, 0])), float(Q[1, 1]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.q11, self.q12], [self.q12, self.q22]])

    @property
    def det(self) -> float:
        return self.q11 * self.q22 - self.q12 * self.q12

    def __call__(self, u) -> np.ndarray | float:
        u = np.asarray(u, dtype=float)
        x, y = u[..., 0], u[..., 1]
        return self.q11 * x * x + 2.0 * self.q12 * x * y + self.q22 * y * y

    def hessian(self) -> np.ndarray:
        return 2.0 * self.matrix


def abs_form(q: QuadraticForm) -> QuadraticForm:
    """Absolute value ``|Q|``: same eigenvectors, absolute eigenvalues."""
    lam, R = np.linalg.eigh(q.matrix)
    return QuadraticForm.from_matrix((R * np.abs(lam)) @ R.T)


def rho_q(T: Triangle, q: QuadraticForm) -> float:
    """Shape quality of ``T`` relative to ``q``; minimal value is 4/sqrt(3)."""
    det = q.det
    scale = max(abs(q.q11), abs(q.q12), abs(q.q22))
    if scale == 0.0 or abs(det) <= 1e-14 * scale * scale:
        raise SingularFormError(f"quadratic form {q} is singular")
    a, b, c = edge_vectors(T)
    num = max(abs(q(a)), abs(q(b)), abs(q(c)))
    return float(num / (T.area * math.sqrt(abs(det))))


def affine_image(T: Triangle, A, t=(0.0, 0.0)) -> Triangle:
    """Image of ``T`` under ``x -> A x + t``; bookkeeping fields are kept."""
    A = np.asarray(A, dtype=float)
    pts = T.points @ A.T + np.asarray(t, dtype=float)
    return Triangle(tuple(map(tuple, pts)), T.newest, T.id, T.level)


def equilateral(side: float = 1.0, origin=(0.0, 0.0)) -> Triangle:
    x0, y0 = origin
    return Triangle(((x0, y0), (x0 + side, y0), (x0 + side / 2.0, y0 + side * math.sqrt(3.0) / 2.0)))


def unit_square_split() -> list[Triangle]:
    """The unit square cut along its diagonal into two symmetric triangles."""
    return [
        Triangle(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0)), id=0),
        Triangle(((0.0, 0.0), (1.0, 1.0), (0.0, 1.0)), id=1),
    ]


def rectangle_split(x0: float, x1: float, y0: float, y1: float) -> list[Triangle]:
    return [
        Triangle(((x0, y0), (x1, y0), (x1, y1)), id=0),
        Triangle(((x0, y0), (x1, y1), (x0, y1)), id=1),
    ]


REFERENCE_TRIANGLE = Triangle(((0.0, 0.0), (1.0, 0.0), (1.0, 1.0)), id=0)
