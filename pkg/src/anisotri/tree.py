"""Adaptive bisection trees: greedy growth, CART pruning and bit encoding."""

from __future__ import annotations

import heapq
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .approx import ApproxConfig, ErrorRecord, local_error
from .geometry import Triangle, bisect
from .refine import RefineConfig, RefineResult, combine, refine_once
from .sources import FunctionSource, assign_root_pixels

LEAF_CODE = 3
MAGIC = b"ATB1"


@dataclass
class Node:
    tri: Triangle
    parent: int
    record: ErrorRecord | None = None
    children: tuple[int, int] | None = None
    apex: int | None = None
    kind: str | None = None
    pixels: np.ndarray | None = None
    # modified rule bookkeeping at split time: (child l^p error, theta * e_T)
    check: tuple[float, float] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def error(self) -> float:
        return self.record.error if self.record is not None else float("nan")


class BisectionTree:
    """Finite subtree of the bisection tree rooted at ``D0``.

    Ids are assigned 0..N0-1 to the roots and consecutively to children at
    split time (first child gets the smaller id).  With a source ``f`` every
    node caches its error record; without one the tree is a bare skeleton.
    """

    def __init__(self, roots: list[Triangle], f: FunctionSource | None = None, acfg: ApproxConfig | None = None):
        if not roots:
            raise ValueError("need at least one root triangle")
        self.f = f
        self.acfg = acfg or ApproxConfig()
        self.nodes: dict[int, Node] = {}
        self.root_ids = list(range(len(roots)))
        self.exhausted = False
        roots = [r.with_id(i, 0) for i, r in enumerate(roots)]
        pix = assign_root_pixels(f, roots) if f is not None and f.is_pixel else [None] * len(roots)
        for r, px in zip(roots, pix):
            rec = local_error(f, r, self.acfg, px) if f is not None else None
            self.nodes[r.id] = Node(r, -1, rec, pixels=px)
        self.next_id = len(roots)

    @property
    def n_roots(self) -> int:
        return len(self.root_ids)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def leaves(self) -> list[int]:
        return sorted(i for i, n in self.nodes.items() if n.children is None)

    @property
    def n_leaves(self) -> int:
        return sum(1 for n in self.nodes.values() if n.children is None)

    def leaf_triangles(self) -> list[Triangle]:
        return [self.nodes[i].tri for i in self.leaves()]

    def leaf_errors(self) -> np.ndarray:
        return np.array([self.nodes[i].error for i in self.leaves()])

    def internal(self) -> list[int]:
        return sorted(i for i, n in self.nodes.items() if n.children is not None)

    def add_children(self, nid: int, apex: int, kind: str, children, records=(None, None), pixels=(None, None)) -> tuple[int, int]:
        node = self.nodes[nid]
        if node.children is not None:
            raise ValueError(f"node {nid} is already split")
        ids = (self.next_id, self.next_id + 1)
        self.next_id += 2
        for cid, tri, rec, px in zip(ids, children, records, pixels):
            tri = tri.with_id(cid, node.tri.level + 1)
            if rec is not None:
                rec = ErrorRecord(cid, rec.error, rec.poly, rec.n_samples)
            self.nodes[cid] = Node(tri, nid, rec, pixels=px)
        node.children = ids
        node.apex = apex
        node.kind = kind
        if self.f is not None and self.f.is_pixel:
            # only leaves need their pixel sets
            node.pixels = None
        return ids

    def split(self, nid: int, rcfg: RefineConfig) -> tuple[int, int]:
        if self.f is None:
            raise ValueError("splitting by a rule needs a source")
        node = self.nodes[nid]
        res: RefineResult = refine_once(self.f, node.tri, self.acfg, rcfg, node.error, node.pixels)
        ids = self.add_children(nid, res.apex, res.kind, res.children, res.records, res.pixels)
        if res.reduced is not None:
            node.check = (res.reduced, res.threshold)
        return ids

    def depth_first(self, nid: int):
        stack = [nid]
        while stack:
            i = stack.pop()
            yield i
            ch = self.nodes[i].children
            if ch:
                stack.extend(reversed(ch))

    def copy_pruned(self, keep_leaf: set[int]) -> "BisectionTree":
        """Copy keeping each subtree only down to the nodes in ``keep_leaf``."""
        new = BisectionTree.__new__(BisectionTree)
        new.f, new.acfg = self.f, self.acfg
        new.root_ids = list(self.root_ids)
        new.exhausted = False
        new.next_id = self.next_id
        new.nodes = {}
        for r in self.root_ids:
            stack = [r]
            while stack:
                i = stack.pop()
                n = self.nodes[i]
                if i in keep_leaf or n.children is None:
                    new.nodes[i] = Node(n.tri, n.parent, n.record, pixels=n.pixels)
                else:
                    new.nodes[i] = Node(n.tri, n.parent, n.record, n.children, n.apex, n.kind, None, n.check)
                    stack.extend(n.children)
        return new

    def structure_ok(self) -> bool:
        """#nodes = 2 #leaves - N0 and every internal node has two children."""
        for n in self.nodes.values():
            if n.children is not None and not all(c in self.nodes for c in n.children):
                return False
        return self.n_nodes == 2 * self.n_leaves - self.n_roots


@dataclass(frozen=True)
class StopRule:
    kind: str  # "max_leaves" | "local_error" | "global_error"
    value: float

    def __post_init__(self):
        if self.kind not in ("max_leaves", "local_error", "global_error"):
            raise ValueError(f"unknown stop rule {self.kind!r}")
        if self.kind != "max_leaves" and not self.value > 0:
            raise ValueError("error tolerance must be positive")


def MaxLeaves(n: int) -> StopRule:
    return StopRule("max_leaves", int(n))


def LocalError(eps: float) -> StopRule:
    return StopRule("local_error", float(eps))


def GlobalError(eps: float) -> StopRule:
    return StopRule("global_error", float(eps))


@dataclass
class GrowthLog:
    """Per-split diagnostics of a greedy run."""

    split_ids: list[int] = field(default_factory=list)
    split_errors: list[float] = field(default_factory=list)
    # largest error among the other leaves when the split happened
    max_remaining: list[float] = field(default_factory=list)
    global_errors: list[float] = field(default_factory=list)
    structure: list[bool] = field(default_factory=list)


def global_error(tree: BisectionTree, p: float | None = None) -> float:
    """``||f - f_N||_{L^p}`` as the l^p norm of the leaf errors."""
    p = tree.acfg.p if p is None else p
    return combine(tree.leaf_errors(), p)


def grow(tree: BisectionTree, rcfg: RefineConfig, stop: StopRule, log: GrowthLog | None = None) -> BisectionTree:
    """Repeatedly split the leaf of largest error until ``stop`` holds."""
    p = tree.acfg.p
    if stop.kind == "max_leaves" and stop.value < tree.n_roots:
        raise ValueError("MaxLeaves target below the number of roots")
    heap = [(-tree.nodes[i].error, i) for i in tree.leaves()]
    heapq.heapify(heap)
    n_leaves = len(heap)
    inf = math.isinf(p)
    total = 0.0 if inf else sum(-e if p == 1 else (-e) ** p for e, _ in heap)

    def current_global() -> float:
        if inf:
            return -heap[0][0] if heap else 0.0
        return max(total, 0.0) ** (1.0 / p)

    while heap:
        if stop.kind == "max_leaves" and n_leaves >= stop.value:
            break
        if stop.kind == "local_error" and -heap[0][0] <= stop.value:
            break
        if stop.kind == "global_error" and current_global() <= stop.value:
            break
        neg, nid = heapq.heappop(heap)
        if neg == 0.0:
            # every remaining leaf is already exact
            heapq.heappush(heap, (neg, nid))
            tree.exhausted = True
            break
        if log is not None:
            log.split_ids.append(nid)
            log.split_errors.append(-neg)
            log.max_remaining.append(-heap[0][0] if heap else 0.0)
        c1, c2 = tree.split(nid, rcfg)
        e1, e2 = tree.nodes[c1].error, tree.nodes[c2].error
        heapq.heappush(heap, (-e1, c1))
        heapq.heappush(heap, (-e2, c2))
        n_leaves += 1
        if not inf:
            total += e1**p + e2**p - (-neg) ** p
        if log is not None:
            log.global_errors.append(current_global())
            log.structure.append(tree.n_nodes == 2 * n_leaves - tree.n_roots)
    return tree


def greedy_grow(
    f: FunctionSource,
    D0: list[Triangle],
    acfg: ApproxConfig | None = None,
    rcfg: RefineConfig | None = None,
    stop: StopRule | None = None,
    log: GrowthLog | None = None,
) -> BisectionTree:
    """Greedy tree algorithm: the adaptive partition is the set of leaves."""
    tree = BisectionTree(D0, f, acfg or ApproxConfig())
    return grow(tree, rcfg or RefineConfig(), stop or MaxLeaves(len(D0)), log)


def isotropic_grow(f, D0, acfg=None, N: int = 0, log: GrowthLog | None = None) -> BisectionTree:
    """Greedy growth with newest-vertex bisection only."""
    return greedy_grow(f, D0, acfg, RefineConfig(rule="newest"), MaxLeaves(N), log)


def uniform_grow(f, D0, acfg=None, N: int = 0) -> BisectionTree:
    """Newest-vertex bisection level by level, ignoring errors, until N leaves."""
    tree = BisectionTree(D0, f, acfg or ApproxConfig())
    rcfg = RefineConfig(rule="newest")
    frontier = list(tree.root_ids)
    n_leaves = len(frontier)
    while n_leaves < N:
        nxt = []
        for nid in frontier:
            if n_leaves >= N:
                break
            nxt.extend(tree.split(nid, rcfg))
            n_leaves += 1
        frontier = nxt
    return tree


def uniform_and_isotropic_baselines(f, D0, N: int, acfg=None) -> tuple[BisectionTree, BisectionTree]:
    return uniform_grow(f, D0, acfg, N), isotropic_grow(f, D0, acfg, N)


# --- CART pruning -----------------------------------------------------------


def _subtree_postorder(tree: BisectionTree) -> list[int]:
    order = []
    for r in tree.root_ids:
        order.extend(tree.depth_first(r))
    return order[::-1]


def cart_objective(tree: BisectionTree, lam: float, p: float | None = None) -> float:
    p = tree.acfg.p if p is None else p
    errs = tree.leaf_errors()
    if math.isinf(p):
        return float(errs.max()) + lam * tree.n_nodes
    return float(np.sum(errs**p)) + lam * tree.n_nodes


def cart_prune(tree: BisectionTree, lam: float, p: float | None = None) -> BisectionTree:
    """Subtree with the same roots minimising error + ``lam`` * #nodes.

    The error term is ``sum e_T^p`` over leaves for finite ``p`` and
    ``max e_T`` for ``p = inf``.  Ties go to the smaller tree.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    p = tree.acfg.p if p is None else p
    if math.isinf(p):
        return _cart_prune_sup(tree, lam)
    cost: dict[int, float] = {}
    cut: set[int] = set()
    for i in _subtree_postorder(tree):
        n = tree.nodes[i]
        leaf_cost = n.error**p + lam
        if n.children is None:
            cost[i] = leaf_cost
            continue
        split_cost = lam + cost[n.children[0]] + cost[n.children[1]]
        if leaf_cost <= split_cost:
            cost[i] = leaf_cost
            cut.add(i)
        else:
            cost[i] = split_cost
    return tree.copy_pruned(cut)


def _minimal_cover(tree: BisectionTree, t: float) -> tuple[set[int], int] | None:
    """Smallest subtree whose leaves all have error <= t (None if impossible)."""
    cut: set[int] = set()
    size = 0
    stack = list(tree.root_ids)
    while stack:
        i = stack.pop()
        n = tree.nodes[i]
        size += 1
        if n.error <= t:
            cut.add(i)
        elif n.children is None:
            return None
        else:
            stack.extend(n.children)
    return cut, size


def _cart_prune_sup(tree: BisectionTree, lam: float) -> BisectionTree:
    best = None
    for t in sorted({n.error for n in tree.nodes.values()}):
        cover = _minimal_cover(tree, t)
        if cover is None:
            continue
        cut, size = cover
        value = t + lam * size
        if best is None or value < best[0] or (value == best[0] and size < best[1]):
            best = (value, size, cut)
    return tree.copy_pruned(best[2])


# --- encoding ---------------------------------------------------------------


class DecodeError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at code {position})")
        self.position = position


@dataclass
class BitStream:
    """2-bit codes in breadth-first order: 0-2 split from that vertex, 3 leaf."""

    n_roots: int
    codes: list[int]

    @property
    def n_bits(self) -> int:
        return 2 * len(self.codes)

    def to_bytes(self) -> bytes:
        out = bytearray(MAGIC + struct.pack(">I", self.n_roots))
        for k in range(0, len(self.codes), 4):
            chunk = self.codes[k : k + 4] + [0] * (4 - len(self.codes[k : k + 4]))
            out.append((chunk[0] << 6) | (chunk[1] << 4) | (chunk[2] << 2) | chunk[3])
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitStream":
        if len(data) < 8 or data[:4] != MAGIC:
            raise DecodeError("missing ATB1 header", 0)
        (n_roots,) = struct.unpack(">I", data[4:8])
        codes = [(b >> s) & 3 for b in data[8:] for s in (6, 4, 2, 0)]
        return cls(n_roots, _trim_codes(codes, n_roots))


def _trim_codes(codes: list[int], n_roots: int) -> list[int]:
    """Drop the zero padding after the last code the tree actually uses."""
    pending = n_roots
    for k, c in enumerate(codes):
        if pending == 0:
            tail = codes[k:]
            if len(tail) >= 4 or any(tail):
                raise DecodeError("trailing data after complete tree", k)
            return codes[:k]
        pending += 1 if c != LEAF_CODE else -1
    if pending:
        raise DecodeError("stream ends before the tree is complete", len(codes))
    return codes


def encode(tree: BisectionTree) -> BitStream:
    codes = []
    queue = list(tree.root_ids)
    k = 0
    while k < len(queue):
        n = tree.nodes[queue[k]]
        k += 1
        if n.children is None:
            codes.append(LEAF_CODE)
        else:
            codes.append(n.apex)
            queue.extend(n.children)
    return BitStream(tree.n_roots, codes)


def decode(stream: BitStream, D0: list[Triangle]) -> BisectionTree:
    """Rebuild the partition geometry from the codes alone."""
    if stream.n_roots != len(D0):
        raise DecodeError(f"stream has {stream.n_roots} roots, D0 has {len(D0)}", 0)
    tree = BisectionTree(D0)
    queue = list(tree.root_ids)
    k = 0
    for pos, code in enumerate(stream.codes):
        if k >= len(queue):
            raise DecodeError("more codes than tree nodes", pos)
        nid = queue[k]
        k += 1
        if code == LEAF_CODE:
            continue
        if code not in (0, 1, 2):
            raise DecodeError(f"invalid code {code}", pos)
        tri = tree.nodes[nid].tri
        children = bisect(tri, code)
        kind = "N" if code == tri.newest else "B"
        queue.extend(tree.add_children(nid, code, kind, children))
    if k != len(queue):
        raise DecodeError("stream ends before the tree is complete", len(stream.codes))
    return tree


def write_bitstream(path, stream: BitStream) -> None:
    with open(path, "wb") as fh:
        fh.write(stream.to_bytes())


def read_bitstream(path) -> BitStream:
    with open(path, "rb") as fh:
        return BitStream.from_bytes(fh.read())

