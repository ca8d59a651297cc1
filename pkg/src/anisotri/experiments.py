"""Experiment drivers behind the command-line interface.

Each ``run_*`` function writes its artefacts into an output directory and
returns a small dict of headline numbers so scripts and tests can use them
without re-reading files.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate

from . import io
from .approx import ApproxConfig
from .geometry import QuadraticForm, Triangle, equilateral, rectangle_split, rho_q, unit_square_split
from .refine import RefineConfig, build_hierarchy
from .sources import (
    CounterexampleInterp,
    CounterexampleL2,
    FunctionSource,
    PixelGrid,
    Quadratic,
    SharpTransition,
)
from .tree import (
    GlobalError,
    GrowthLog,
    LocalError,
    MaxLeaves,
    StopRule,
    cart_prune,
    encode,
    global_error,
    greedy_grow,
    isotropic_grow,
    uniform_grow,
    write_bitstream,
)
from .wavelet import decompose, leafwise_distance, reconstruct, threshold

COMMANDS = ("hierarchy", "greedy", "cart", "wavelet", "image", "sharp-table")
SHARP_DELTAS = (0.2, 0.1, 0.05, 0.02)


@dataclass
class ExperimentSpec:
    command: str
    source: str = "sharp:0.2"
    acfg: ApproxConfig = field(default_factory=ApproxConfig)
    rcfg: RefineConfig = field(default_factory=lambda: RefineConfig(rule="modified"))
    stop: StopRule = field(default_factory=lambda: MaxLeaves(1024))
    lam: float = 1e-6
    eps: float = 1e-3
    outdir: Path = Path("out")

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        self.outdir = Path(self.outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        if not os.access(self.outdir, os.W_OK):
            raise PermissionError(f"output directory {self.outdir} is not writable")


def parse_source(text: str) -> tuple[FunctionSource, list[Triangle]]:
    """Source and initial partition from ``name[:args]``.

    ``sharp:DELTA``, ``l2_counterexample``, ``interp_counterexample:M``,
    ``quadratic:Q11,Q12,Q22`` (equilateral start) or ``pgm:PATH``.
    """
    name, _, arg = text.partition(":")
    if name == "sharp":
        f = SharpTransition(float(arg or 0.2))
        return f, rectangle_split(*f.domain)
    if name == "l2_counterexample":
        return CounterexampleL2(), unit_square_split()
    if name == "interp_counterexample":
        return CounterexampleInterp(int(arg or 1)), unit_square_split()
    if name == "quadratic":
        q = QuadraticForm(*(float(v) for v in arg.split(","))) if arg else QuadraticForm(1.0, 0.0, 100.0)
        return Quadratic(q), [equilateral()]
    if name == "pgm":
        return io.read_pgm(arg), unit_square_split()
    raise ValueError(f"unknown source {text!r}")


def parse_stop(text: str) -> StopRule:
    """``leaves:N``, ``local:EPS`` or ``global:EPS``."""
    kind, _, val = text.partition(":")
    if kind == "leaves":
        return MaxLeaves(int(val))
    if kind == "local":
        return LocalError(float(val))
    if kind == "global":
        return GlobalError(float(val))
    raise ValueError(f"unknown stop rule {text!r}")


def _signature_fill(f: FunctionSource, T: Triangle) -> str:
    sig = getattr(f, "hessian_signature", None)
    if sig is None:
        return "none"
    s = int(sig(np.array([T.barycenter]))[0])
    return {-1: io.FILL["white"], 0: io.FILL["grey"], 1: io.FILL["dark"]}[s]


# --- quadratic demo ---------------------------------------------------------


def run_quadratic_demo(q: QuadraticForm, J: int, outdir, acfg: ApproxConfig | None = None,
                       rcfg: RefineConfig | None = None) -> dict:
    """Refine an equilateral triangle ``J`` times for ``f = q``; colour by rho_q."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    H = build_hierarchy(Quadratic(q), [equilateral()], J, acfg, rcfg)
    tris = H.level(J)
    classes = [io.quadratic_class(T, q) for T in tris]
    good = sum(rho_q(T, q) <= io.RHO_GOOD for T in tris) / len(tris)
    stats = {
        "J": J,
        "n_triangles": len(tris),
        "frac_rho_q_good": good,
        "frac_white": classes.count("white") / len(tris),
        "frac_grey": classes.count("grey") / len(tris),
        "frac_dark": classes.count("dark") / len(tris),
    }
    io.write_svg(outdir / "quadratic.svg", tris, [io.FILL[c] for c in classes])
    io.write_csv(outdir / "quadratic.csv", list(stats), [list(stats.values())])
    return stats


# --- greedy / cart ----------------------------------------------------------


def run_greedy(spec: ExperimentSpec) -> dict:
    f, D0 = parse_source(spec.source)
    log = GrowthLog()
    t0 = time.perf_counter()
    tree = greedy_grow(f, D0, spec.acfg, spec.rcfg, spec.stop, log)
    elapsed = time.perf_counter() - t0
    out = spec.outdir
    io.write_mesh(out / "mesh.txt", tree)
    write_bitstream(out / "tree.atb", encode(tree))
    tris = tree.leaf_triangles()
    io.write_svg(out / "mesh.svg", tris, [_signature_fill(f, T) for T in tris])
    n0 = len(D0)
    io.write_csv(
        out / "convergence.csv",
        ["n_leaves", "split_id", "split_error", "global_error"],
        [[n0 + k + 1, i, e, g] for k, (i, e, g) in enumerate(zip(log.split_ids, log.split_errors, log.global_errors))],
    )
    err = global_error(tree)
    return {"n_leaves": tree.n_leaves, "global_error": err, "N_times_error": tree.n_leaves * err, "seconds": elapsed}


def run_cart(spec: ExperimentSpec) -> dict:
    """Grow generously with ``spec.stop``, then prune at ``spec.lam``."""
    f, D0 = parse_source(spec.source)
    tree = greedy_grow(f, D0, spec.acfg, spec.rcfg, spec.stop)
    pruned = cart_prune(tree, spec.lam)
    out = spec.outdir
    io.write_mesh(out / "pruned_mesh.txt", pruned)
    write_bitstream(out / "pruned.atb", encode(pruned))
    io.write_svg(out / "pruned.svg", pruned.leaf_triangles())
    rows = [
        ["grown", tree.n_leaves, tree.n_nodes, global_error(tree)],
        ["pruned", pruned.n_leaves, pruned.n_nodes, global_error(pruned)],
    ]
    io.write_csv(out / "cart.csv", ["tree", "n_leaves", "n_nodes", "global_error"], rows)
    return {"grown_leaves": tree.n_leaves, "pruned_leaves": pruned.n_leaves, "pruned_error": global_error(pruned)}


# --- wavelets ---------------------------------------------------------------


def run_wavelet(spec: ExperimentSpec, J: int = 8) -> dict:
    """Multiscale decomposition on the adapted hierarchy, thresholded at ``eps``."""
    f, D0 = parse_source(spec.source)
    H = build_hierarchy(f, D0, J, spec.acfg, spec.rcfg)
    coeffs = decompose(f, H.tree, spec.acfg)
    kept = threshold(coeffs, spec.eps)
    full = reconstruct(coeffs, H.tree)
    approx = reconstruct(kept, H.tree)
    n_terms = sum(int(np.count_nonzero(v)) for v in kept.wavelet.values())
    err = leafwise_distance(full, approx)
    io.write_coefficients(spec.outdir / "coefficients.txt", coeffs)
    io.write_csv(
        spec.outdir / "wavelet.csv",
        ["J", "eps", "n_wavelets", "n_kept", "l2_error"],
        [[J, spec.eps, 3 * len(coeffs.wavelet), n_terms, err]],
    )
    return {"n_kept": n_terms, "l2_error": err}


# --- image ------------------------------------------------------------------


def run_image(path, N: int, rules=("newest", "greedy", "modified"), outdir="out", acfg=None, theta=2.0 / 3.0) -> dict:
    """Greedy tree approximation of a PGM under each rule; PSNR per rule."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    f: PixelGrid = io.read_pgm(path)
    acfg = acfg or ApproxConfig()
    rows, result = [], {}
    for rule in rules:
        t0 = time.perf_counter()
        tree = greedy_grow(f, unit_square_split(), acfg, RefineConfig(rule=rule, theta=theta), MaxLeaves(N))
        img = io.rasterize(tree, f)
        elapsed = time.perf_counter() - t0
        value = io.psnr(f.image, img)
        stream = encode(tree)
        io.write_pgm(outdir / f"approx_{rule}.pgm", img)
        io.write_svg(outdir / f"mesh_{rule}.svg", tree.leaf_triangles())
        write_bitstream(outdir / f"tree_{rule}.atb", stream)
        splits = tree.n_leaves - tree.n_roots
        rows.append([rule, tree.n_leaves, value, stream.n_bits, splits, elapsed])
        result[rule] = {"psnr": value, "bits": stream.n_bits, "splits": splits, "seconds": elapsed}
    io.write_csv(outdir / "image.csv", ["rule", "n_leaves", "psnr_db", "bits", "splits", "seconds"], rows)
    return result


# --- sharp transition table -------------------------------------------------


def _arc_angle(r: float, x1: float, y1: float) -> float:
    """Angle of the arc of radius ``r`` inside ``[0, x1] x [0, y1]``."""
    if r <= 0.0:
        return math.pi / 2.0
    lost = math.acos(min(1.0, x1 / r)) + math.acos(min(1.0, y1 / r))
    return max(0.0, math.pi / 2.0 - lost)


def hessian_constants(f: SharpTransition) -> dict:
    """``U = ||d2f||_L2``, ``I = ||d2f||_L2/3`` and ``A = ||sqrt|det d2f| ||_L2/3``.

    ``|d2f|`` is the Frobenius norm.  The integrands are radial, so over a
    rectangle with lower-left corner at the origin each integral reduces to
    ``int h(r) r theta(r) dr`` with ``theta`` the arc angle inside the domain.
    """
    x1, y1 = f.domain[1], f.domain[3]
    if f.domain[0] != 0.0 or f.domain[2] != 0.0:
        raise ValueError("radial reduction needs the domain corner at the origin")
    d = f.delta
    # zero of g'' inside the transition, where the det integrand has a cusp
    rr = np.linspace(1.0, 1.0 + d, 2001)
    g2 = f.g(rr, 2)
    flips = rr[1:][np.diff(np.sign(g2)) != 0]
    brk = sorted({1.0, 1.0 + d, x1, y1, *flips.tolist()})
    rmax = math.hypot(x1, y1)

    def eig(s: float) -> tuple[float, float]:
        g = f.g(np.array([s, s]), 2)[0], f.g(np.array([s, s]), 1)[0]
        return float(g[0]), float(g[1] / s) if s > 0 else float(g[0])

    integrands = {
        "U": lambda a, b: a * a + b * b,
        "I": lambda a, b: math.hypot(a, b) ** (2.0 / 3.0),
        "A": lambda a, b: abs(a * b) ** (1.0 / 3.0),
    }
    out = {}
    for key, h in integrands.items():
        v = integrate.quad(
            lambda s, h=h: h(*eig(s)) * s * _arc_angle(s, x1, y1),
            0.0, rmax, points=[b for b in brk if b < rmax], limit=400, epsabs=1e-11, epsrel=1e-10,
        )[0]
        out[key] = math.sqrt(v) if key == "U" else v**1.5
    return out


def sharp_table_row(delta: float, N: int, acfg=None, theta: float = 2.0 / 3.0, with_constants: bool = True) -> dict:
    f = SharpTransition(delta)
    D0 = rectangle_split(*f.domain)
    acfg = acfg or ApproxConfig()
    row = {"delta": delta, "N": N}
    if with_constants:
        row.update(hessian_constants(f))
    t0 = time.perf_counter()
    row["C_U"] = N * global_error(uniform_grow(f, D0, acfg, N))
    row["C_I"] = N * global_error(isotropic_grow(f, D0, acfg, N))
    row["C_A"] = N * global_error(greedy_grow(f, D0, acfg, RefineConfig(rule="modified", theta=theta), MaxLeaves(N)))
    row["seconds"] = time.perf_counter() - t0
    return row


def run_sharp_table(deltas=SHARP_DELTAS, N: int = 8192, outdir="out", acfg=None, theta: float = 2.0 / 3.0) -> list[dict]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = [sharp_table_row(d, N, acfg, theta) for d in deltas]
    header = ["delta", "N", "U", "I", "A", "C_U", "C_I", "C_A"]
    io.write_csv(outdir / "sharp_table.csv", header, [[r[k] for k in header] for r in rows])
    return rows


def synthetic_image(size: int = 512) -> np.ndarray:
    """Deterministic test picture in [0, 1]: smooth shading, a disc, a
    slanted bar and a soft blob, giving both curved and straight edges."""
    y, x = np.mgrid[0:size, 0:size] / float(size)
    img = 0.35 + 0.25 * x + 0.1 * np.sin(3.0 * np.pi * y)
    img = np.where((x - 0.35) ** 2 + (y - 0.4) ** 2 < 0.18**2, 0.85 - 0.3 * y, img)
    bar = np.abs((x - 0.7) * 0.8 + (y - 0.55) * 0.6) < 0.05
    img = np.where(bar & (y > 0.15) & (y < 0.95), 0.1, img)
    img += 0.25 * np.exp(-((x - 0.75) ** 2 + (y - 0.2) ** 2) / 0.01)
    return np.clip(img, 0.0, 1.0)
