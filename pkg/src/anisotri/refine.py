"""Decision functions, the greedy and modified refinement rules, and the
full-level hierarchy D_0, D_1, ..., D_J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .approx import INTERPOLATION, PROJECTION, ApproxConfig, ErrorRecord, local_error
from .geometry import Triangle, bisect
from .sources import FunctionSource, split_pixels

METRICS = ("l2_proj", "lp_proj", "l1_interp", "lp_interp")
RULES = ("greedy", "modified", "newest")
TIE_RULES = ("lex_max", "lex_min")

# relative gap under which two decision values count as tied
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class RefineConfig:
    """How a triangle is bisected.

    ``metric`` picks the decision function: ``l2_proj`` sums squared child
    L2-projection errors, ``lp_proj`` sums p-th powers of child L^p
    projection errors, ``l1_interp`` sums child L1 interpolation errors and
    ``lp_interp`` p-th powers of child L^p interpolation errors
    (``metric_p`` gives p).  ``rule`` is ``greedy`` (always split along the
    minimiser), ``modified`` (greedy only if the best split reduces the error
    by ``theta``, else newest-vertex) or ``newest`` (always newest-vertex).
    Ties among minimisers go to the largest (``lex_max``) or smallest
    (``lex_min``) opposite vertex in lexicographic order.
    """

    metric: str = "l2_proj"
    metric_p: float = 2.0
    rule: str = "greedy"
    theta: float = 2.0 / 3.0
    tie_rule: str = "lex_max"

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown decision metric {self.metric!r}")
        if self.rule not in RULES:
            raise ValueError(f"unknown refinement rule {self.rule!r}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        if self.tie_rule not in TIE_RULES:
            raise ValueError(f"unknown tie rule {self.tie_rule!r}")

    def metric_config(self, acfg: ApproxConfig) -> ApproxConfig:
        if self.metric == "l2_proj":
            return replace(acfg, p=2.0, operator=PROJECTION)
        if self.metric == "lp_proj":
            return replace(acfg, p=self.metric_p, operator=PROJECTION)
        if self.metric == "l1_interp":
            return replace(acfg, p=1.0, operator=INTERPOLATION)
        return replace(acfg, p=self.metric_p, operator=INTERPOLATION)


def combine(errors, p: float) -> float:
    """l^p aggregation of local errors."""
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        return 0.0
    if math.isinf(p):
        return float(errors.max())
    if p == 2:
        return math.sqrt(float(np.dot(errors, errors)))
    return float(np.sum(errors**p)) ** (1.0 / p)


def _power_sum(errors, p: float) -> float:
    if math.isinf(p):
        return max(errors)
    return sum(e**p for e in errors)


@dataclass
class Candidate:
    apex: int
    children: tuple[Triangle, Triangle]
    pixels: tuple[np.ndarray | None, np.ndarray | None]
    records: dict = field(default_factory=dict)  # ApproxConfig -> (rec1, rec2)

    def errors(self, f, cfg: ApproxConfig) -> tuple[ErrorRecord, ErrorRecord]:
        if cfg not in self.records:
            self.records[cfg] = tuple(
                local_error(f, c, cfg, px) for c, px in zip(self.children, self.pixels)
            )
        return self.records[cfg]


def make_candidate(f: FunctionSource, T: Triangle, apex: int, pixels=None) -> Candidate:
    c1, c2 = bisect(T, apex)
    if f.is_pixel and pixels is not None:
        px = split_pixels(f, pixels, c1)
    else:
        px = (None, None)
    return Candidate(apex, (c1, c2), px)


def decision_values(f, T: Triangle, acfg: ApproxConfig, rcfg: RefineConfig, pixels=None):
    """``d_T(e, f)`` for the three possible apexes, with the candidates built."""
    mcfg = rcfg.metric_config(acfg)
    cands = [make_candidate(f, T, a, pixels) for a in range(3)]
    d = [_power_sum([r.error for r in c.errors(f, mcfg)], mcfg.p) for c in cands]
    return np.array(d), cands


def _break_tie(T: Triangle, d: np.ndarray, tie_rule: str, scale: float = 0.0) -> int:
    dmin = float(d.min())
    tol = TIE_RTOL * max(dmin, scale) + 1e-300
    tied = [a for a in range(3) if d[a] <= dmin + tol]
    key = lambda a: T.vertices[a]  # noqa: E731
    return max(tied, key=key) if tie_rule == "lex_max" else min(tied, key=key)


def decide(f, T: Triangle, acfg: ApproxConfig, rcfg: RefineConfig, pixels=None) -> int:
    """Apex index of the bisection minimising the decision function."""
    d, _ = decision_values(f, T, acfg, rcfg, pixels)
    return _break_tie(T, d, rcfg.tie_rule)


@dataclass
class RefineResult:
    apex: int
    kind: str  # "B" greedy, "N" newest vertex
    children: tuple[Triangle, Triangle]
    records: tuple[ErrorRecord, ErrorRecord]
    pixels: tuple
    decision: np.ndarray | None = None
    greedy_apex: int | None = None
    # modified rule: l^p norm of the best split's child errors vs theta * e_T
    reduced: float | None = None
    threshold: float | None = None


def refine_once(
    f: FunctionSource,
    T: Triangle,
    acfg: ApproxConfig,
    rcfg: RefineConfig,
    parent_error: float | None = None,
    pixels=None,
) -> RefineResult:
    """Bisect ``T`` once according to ``rcfg``; child errors use ``acfg``."""
    if rcfg.rule == "newest":
        cand = make_candidate(f, T, T.newest, pixels)
        return RefineResult(T.newest, "N", cand.children, cand.errors(f, acfg), cand.pixels)

    d, cands = decision_values(f, T, acfg, rcfg, pixels)
    if parent_error is None:
        parent_error = local_error(f, T, acfg, pixels).error
    mcfg = rcfg.metric_config(acfg)
    scale = parent_error**mcfg.p if not math.isinf(mcfg.p) else parent_error
    apex = _break_tie(T, d, rcfg.tie_rule, scale)
    best = cands[apex]
    recs = best.errors(f, acfg)
    if rcfg.rule == "greedy":
        return RefineResult(apex, "B", best.children, recs, best.pixels, d, apex)

    reduced = combine([r.error for r in recs], acfg.p)
    threshold = rcfg.theta * parent_error
    if parent_error == 0.0 or reduced <= threshold:
        return RefineResult(apex, "B", best.children, recs, best.pixels, d, apex, reduced, threshold)
    fallback = cands[T.newest]
    return RefineResult(
        T.newest, "N", fallback.children, fallback.errors(f, acfg), fallback.pixels, d, apex, reduced, threshold
    )


@dataclass
class Hierarchy:
    """Levels of a uniformly refined bisection tree, as lists of node ids."""

    tree: "object"
    levels: list[list[int]]

    def level(self, j: int) -> list[Triangle]:
        return [self.tree.nodes[i].tri for i in self.levels[j]]


def build_hierarchy(
    f: FunctionSource,
    D0: list[Triangle],
    J: int,
    acfg: ApproxConfig | None = None,
    rcfg: RefineConfig | None = None,
) -> Hierarchy:
    """Split every triangle of every level ``J`` times; ``#D_j = 2^j #D_0``."""
    from .tree import BisectionTree

    if J < 0:
        raise ValueError("J must be >= 0")
    acfg = acfg or ApproxConfig()
    rcfg = rcfg or RefineConfig()
    tree = BisectionTree(D0, f, acfg)
    levels = [list(tree.root_ids)]
    for _ in range(J):
        nxt = []
        for nid in levels[-1]:
            nxt.extend(tree.split(nid, rcfg))
        levels.append(nxt)
    return Hierarchy(tree, levels)
