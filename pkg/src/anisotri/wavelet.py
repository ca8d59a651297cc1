"""Piecewise-linear orthonormal multiwavelets on a bisection tree.

On each triangle the scaling functions are the three affine functions equal
to ``+sqrt(3/|T|)`` at one vertex and ``-sqrt(3/|T|)`` at the other two.
Each split node carries three wavelets spanning the orthogonal complement of
the parent's affine functions inside the children's.  Coefficient vectors
are indexed by the stored vertex order of their triangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .approx import ApproxConfig, lp_norm
from .geometry import Triangle
from .quadrature import triangle_points
from .sources import FunctionSource

SQRT2 = math.sqrt(2.0)
_INV_PATTERN = (np.eye(3) - np.ones((3, 3))) / 2.0  # inverse of 2I - J


class LabelingError(ValueError):
    pass


class CoefficientIndexError(KeyError):
    pass


def _scale(T: Triangle) -> float:
    return math.sqrt(3.0 / T.area)


def vertex_values(T: Triangle) -> np.ndarray:
    """``V[i, k] = phi_T^i(v_k)``."""
    return _scale(T) * (2.0 * np.eye(3) - np.ones((3, 3)))


def barycentric(T: Triangle, pts: np.ndarray) -> np.ndarray:
    p = T.points
    M = np.array([[p[0, 0], p[1, 0], p[2, 0]], [p[0, 1], p[1, 1], p[2, 1]], [1.0, 1.0, 1.0]])
    rhs = np.vstack([np.atleast_2d(pts).T, np.ones(len(np.atleast_2d(pts)))])
    return np.linalg.solve(M, rhs).T


def scaling_functions(T: Triangle, pts: np.ndarray) -> np.ndarray:
    """``(n, 3)`` values of phi_T^1..3 at ``pts``."""
    return _scale(T) * (2.0 * barycentric(T, pts) - 1.0)


@dataclass(frozen=True)
class ScalingBasis:
    triangle: Triangle

    def __call__(self, pts) -> np.ndarray:
        return scaling_functions(self.triangle, np.atleast_2d(pts))

    def coefficients_of_linear(self, values_at_vertices) -> np.ndarray:
        """Coefficients of the affine function with the given vertex values."""
        return _INV_PATTERN @ np.asarray(values_at_vertices, dtype=float) / _scale(self.triangle)


def scaling_basis(T: Triangle) -> ScalingBasis:
    if not T.is_valid():
        raise ValueError(f"degenerate triangle {T.vertices}")
    return ScalingBasis(T)


def _same(p, q, tol) -> bool:
    return abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol


def child_labels(T: Triangle, c1: Triangle, c2: Triangle) -> tuple[list[int], list[int]]:
    """Stored indices of (shared vertex, midpoint, own vertex) in each child.

    The midpoint is each child's newest vertex; the shared vertex is the other
    vertex common to both children.
    """
    tol = 1e-12 * T.diameter
    m1, m2 = c1.vertices[c1.newest], c2.vertices[c2.newest]
    if not _same(m1, m2, tol):
        raise LabelingError("children do not share their newest vertex")
    shared = [
        (i, j)
        for i in range(3)
        for j in range(3)
        if i != c1.newest and j != c2.newest and _same(c1.vertices[i], c2.vertices[j], tol)
    ]
    if len(shared) != 1:
        raise LabelingError("children must share exactly one vertex besides the midpoint")
    i1, j1 = shared[0]
    own1 = 3 - i1 - c1.newest
    own2 = 3 - j1 - c2.newest
    a, b = np.array(c1.vertices[own1]), np.array(c2.vertices[own2])
    if not _same((a + b) / 2.0, m1, tol):
        raise LabelingError("newest vertex is not the midpoint of the split edge")
    for v in (c1.vertices[i1], c1.vertices[own1], c2.vertices[own2]):
        if not any(_same(v, w, tol) for w in T.vertices):
            raise LabelingError("children are not a bisection of the parent")
    return [i1, c1.newest, own1], [j1, c2.newest, own2]


@dataclass(frozen=True)
class WaveletTriple:
    """psi_T^1..3 expressed in the children's scaling bases.

    ``first[k]`` / ``second[k]`` hold the coefficients of psi^{k+1} on the
    first / second child.
    """

    parent: Triangle
    children: tuple[Triangle, Triangle]
    first: np.ndarray
    second: np.ndarray

    def __call__(self, pts) -> np.ndarray:
        """``(n, 3)`` wavelet values; points on the shared edge use the first child."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        c1, c2 = self.children
        l1 = barycentric(c1, pts)
        in1 = np.all(l1 >= -1e-12, axis=1)
        out = np.zeros((len(pts), 3))
        if in1.any():
            out[in1] = scaling_functions(c1, pts[in1]) @ self.first.T
        rest = ~in1
        if rest.any():
            l2 = barycentric(c2, pts[rest])
            in2 = np.all(l2 >= -1e-12, axis=1)
            vals = scaling_functions(c2, pts[rest]) @ self.second.T
            vals[~in2] = 0.0
            out[rest] = vals
        return out


def wavelet_triple(T: Triangle, c1: Triangle, c2: Triangle) -> WaveletTriple:
    lab1, lab2 = child_labels(T, c1, c2)
    W1 = np.zeros((3, 3))
    W2 = np.zeros((3, 3))
    v1, v2, v3 = lab1
    w1, w2, w3 = lab2
    W1[0, v3], W2[0, w3] = 1 / SQRT2, -1 / SQRT2
    W1[1, v1], W1[1, v2], W2[1, w1], W2[1, w2] = 0.5, -0.5, -0.5, 0.5
    # the third wavelet pairs the midpoint with the own vertex; pairing the
    # shared vertex instead is not orthogonal to the parent's affine space
    W1[2, v2], W1[2, v3], W2[2, w2], W2[2, w3] = 0.5, -0.5, 0.5, -0.5
    return WaveletTriple(T, (c1, c2), W1, W2)


def restriction_matrix(T: Triangle, child: Triangle) -> np.ndarray:
    """``A[i, j] = <phi_child^i, phi_T^j>`` over the child."""
    vals = scaling_functions(T, child.points)  # (3 child vertices, 3 functions)
    return _INV_PATTERN @ vals / _scale(child)


def two_scale_matrix(T: Triangle, c1: Triangle, c2: Triangle) -> np.ndarray:
    """Orthogonal 6x6 map from child coefficients to (scaling, wavelet) ones."""
    wt = wavelet_triple(T, c1, c2)
    A1 = restriction_matrix(T, c1)
    A2 = restriction_matrix(T, c2)
    return np.block([[A1.T, A2.T], [wt.first, wt.second]])


@dataclass
class CoeffMap:
    """Root scaling coefficients and per-node wavelet coefficients."""

    scaling: dict[int, np.ndarray] = field(default_factory=dict)
    wavelet: dict[int, np.ndarray] = field(default_factory=dict)
    levels: dict[int, int] = field(default_factory=dict)

    def copy(self) -> "CoeffMap":
        return CoeffMap(
            {k: v.copy() for k, v in self.scaling.items()},
            {k: v.copy() for k, v in self.wavelet.items()},
            dict(self.levels),
        )

    def energy(self) -> float:
        return float(sum(np.dot(v, v) for v in self.scaling.values()) + sum(np.dot(v, v) for v in self.wavelet.values()))

    def wavelet_items(self):
        """``((node id, index), value)`` pairs, index 0..2."""
        for nid in sorted(self.wavelet):
            for i, v in enumerate(self.wavelet[nid]):
                yield (nid, i), float(v)


def _tree_of(tree):
    return getattr(tree, "tree", tree)


def leaf_coefficients(f: FunctionSource, tree, cfg: ApproxConfig | None = None) -> dict[int, np.ndarray]:
    """``<f, phi_L^i>`` on every leaf, by quadrature.

    Pixel grids are integrated as piecewise-constant images.
    """
    cfg = cfg or ApproxConfig()
    tree = _tree_of(tree)
    out = {}
    for lid in tree.leaves():
        T = tree.nodes[lid].tri
        pts, w = triangle_points(T.points, cfg.quadrature_order, f.breaklines, cfg.quadrature_levels)
        out[lid] = scaling_functions(T, pts).T @ (w * f(pts))
    return out


def _postorder(tree) -> list[int]:
    order = []
    for r in tree.root_ids:
        order.extend(tree.depth_first(r))
    return order[::-1]


def analyse(leaf_coeffs: dict[int, np.ndarray], tree) -> CoeffMap:
    """Fine-to-coarse transform of leaf scaling coefficients."""
    tree = _tree_of(tree)
    c: dict[int, np.ndarray] = {}
    out = CoeffMap()
    for nid in _postorder(tree):
        node = tree.nodes[nid]
        if node.children is None:
            c[nid] = np.asarray(leaf_coeffs[nid], dtype=float)
            continue
        i1, i2 = node.children
        M = two_scale_matrix(node.tri, tree.nodes[i1].tri, tree.nodes[i2].tri)
        y = M @ np.concatenate([c.pop(i1), c.pop(i2)])
        c[nid] = y[:3]
        out.wavelet[nid] = y[3:]
        out.levels[nid] = node.tri.level
    for r in tree.root_ids:
        out.scaling[r] = c[r]
        out.levels[r] = 0
    return out


def decompose(f: FunctionSource, tree, cfg: ApproxConfig | None = None) -> CoeffMap:
    """Coefficients of the leaf-wise L2 projection in the multiscale basis."""
    return analyse(leaf_coefficients(f, tree, cfg), tree)


def reconstruct(coeffs: CoeffMap, tree) -> dict[int, np.ndarray]:
    """Leaf scaling coefficients of the function with the given expansion.

    Missing wavelet entries count as zero (thresholded); ids that are not
    split nodes of ``tree`` raise ``CoefficientIndexError``.
    """
    tree = _tree_of(tree)
    for nid in coeffs.wavelet:
        if nid not in tree.nodes or tree.nodes[nid].children is None:
            raise CoefficientIndexError(f"wavelet index {nid} is not a split node of the tree")
    for nid in coeffs.scaling:
        if nid not in tree.root_ids:
            raise CoefficientIndexError(f"scaling index {nid} is not a root of the tree")
    out = {}
    for r in tree.root_ids:
        stack = [(r, np.asarray(coeffs.scaling.get(r, np.zeros(3)), dtype=float))]
        while stack:
            nid, cT = stack.pop()
            node = tree.nodes[nid]
            if node.children is None:
                out[nid] = cT
                continue
            i1, i2 = node.children
            M = two_scale_matrix(node.tri, tree.nodes[i1].tri, tree.nodes[i2].tri)
            d = coeffs.wavelet.get(nid, np.zeros(3))
            x = M.T @ np.concatenate([cT, d])
            stack.append((i2, x[3:]))
            stack.append((i1, x[:3]))
    return out


def wavelet_lp_norm(tree, nid: int, k: int, p: float, cfg: ApproxConfig | None = None) -> float:
    """``||psi_{nid}^{k+1}||_{L^p}``."""
    tree = _tree_of(tree)
    node = tree.nodes[nid]
    c1, c2 = (tree.nodes[i].tri for i in node.children)
    wt = wavelet_triple(node.tri, c1, c2)
    n1 = lp_norm(lambda x: scaling_functions(c1, x) @ wt.first[k], c1, p, cfg)
    n2 = lp_norm(lambda x: scaling_functions(c2, x) @ wt.second[k], c2, p, cfg)
    if math.isinf(p):
        return max(n1, n2)
    return (n1**p + n2**p) ** (1.0 / p)


def threshold(coeffs: CoeffMap, eps: float, mode: str = "plain", p: float = 2.0, tree=None) -> CoeffMap:
    """Keep wavelet terms with ``|f_l| >= eps`` (``plain``) or
    ``||f_l psi_l||_{L^p} >= eps`` (``norm``).  Root scaling terms are kept."""
    if eps < 0:
        raise ValueError("threshold must be non-negative")
    out = CoeffMap({k: v.copy() for k, v in coeffs.scaling.items()}, {}, dict(coeffs.levels))
    for nid, d in coeffs.wavelet.items():
        if mode == "plain" or (mode == "norm" and p == 2):
            size = np.abs(d)
        elif mode == "norm":
            if tree is None:
                raise ValueError("norm-weighted thresholding with p != 2 needs the tree")
            size = np.abs(d) * np.array([wavelet_lp_norm(tree, nid, k, p) for k in range(3)])
        else:
            raise ValueError(f"unknown threshold mode {mode!r}")
        kept = np.where(size >= eps, d, 0.0)
        if np.any(kept != 0.0):
            out.wavelet[nid] = kept
    return out


def evaluate_leafwise(leaf_coeffs: dict[int, np.ndarray], tree, pts) -> np.ndarray:
    """Point values of a piecewise-affine function given on the leaves."""
    tree = _tree_of(tree)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    out = np.full(len(pts), np.nan)
    todo = np.ones(len(pts), dtype=bool)
    for lid in tree.leaves():
        if not todo.any():
            break
        T = tree.nodes[lid].tri
        lam = barycentric(T, pts[todo])
        inside = np.all(lam >= -1e-12, axis=1)
        if inside.any():
            idx = np.flatnonzero(todo)[inside]
            out[idx] = scaling_functions(T, pts[idx]) @ leaf_coeffs[lid]
            todo[idx] = False
    return out


def leafwise_distance(a: dict[int, np.ndarray], b: dict[int, np.ndarray]) -> float:
    """L2 distance of two leaf-wise expansions on the same tree."""
    return math.sqrt(sum(float(np.sum((a[k] - b[k]) ** 2)) for k in a))
