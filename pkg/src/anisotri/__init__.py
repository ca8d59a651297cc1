"""Adaptive anisotropic triangulations by greedy bisection.

Modules: ``geometry`` (triangles, bisection, shape quality), ``sources``
(test functions and pixel images), ``approx`` (local projection and
interpolation errors), ``refine`` (decision functions and refinement
rules), ``tree`` (greedy growth, CART pruning, bit encoding), ``wavelet``
(orthonormal piecewise-linear multiwavelets) and ``io``/``experiments``/
``cli`` (file formats and experiment drivers).
"""

from .approx import ApproxConfig, local_error, project
from .geometry import QuadraticForm, Triangle, bisect, rho_q
from .refine import RefineConfig, build_hierarchy, refine_once
from .tree import BisectionTree, MaxLeaves, cart_prune, decode, encode, greedy_grow

__all__ = [
    "ApproxConfig",
    "BisectionTree",
    "MaxLeaves",
    "QuadraticForm",
    "RefineConfig",
    "Triangle",
    "bisect",
    "build_hierarchy",
    "cart_prune",
    "decode",
    "encode",
    "greedy_grow",
    "local_error",
    "project",
    "refine_once",
    "rho_q",
]
