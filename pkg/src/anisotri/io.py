"""File formats: PGM images, SVG meshes, CSV tables, mesh and coefficient text."""

from __future__ import annotations

import csv
import math
import re
from xml.sax.saxutils import escape

import numpy as np

from .geometry import QuadraticForm, SingularFormError, Triangle, abs_form, rho_q
from .sources import PixelGrid

# rho_q threshold for a well adapted triangle: three times the optimum 4/sqrt(3)
RHO_GOOD = 4.0 * math.sqrt(3.0)

FILL = {"white": "#ffffff", "grey": "#b0b0b0", "dark": "#404040"}


class PGMError(ValueError):
    pass


# --- PGM --------------------------------------------------------------------

_TOKEN = re.compile(rb"#[^\n\r]*[\n\r]?|\S+")


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """First ``count`` header tokens and the offset just past the last one."""
    tokens, pos = [], 0
    while len(tokens) < count:
        m = _TOKEN.search(data, pos)
        if m is None:
            raise PGMError("truncated PGM header")
        pos = m.end()
        if not m.group().startswith(b"#"):
            tokens.append(m.group())
    return tokens, pos


def parse_pgm(data: bytes) -> np.ndarray:
    """Decode a P2 or P5 PGM into an ``(H, W)`` float array in [0, 1]."""
    if data[:2] not in (b"P2", b"P5"):
        raise PGMError("not a P2/P5 PGM file")
    tokens, pos = _header_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError as exc:
        raise PGMError("non-integer PGM header field") from exc
    if width <= 0 or height <= 0:
        raise PGMError("PGM dimensions must be positive")
    if not 0 < maxval < 65536:
        raise PGMError("PGM maxval must lie in 1..65535")
    n = width * height
    if tokens[0] == b"P5":
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(data) or not data[pos : pos + 1].isspace():
            raise PGMError("missing whitespace after PGM header")
        raster = data[pos + 1 :]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(raster) < n * dtype.itemsize:
            raise PGMError("PGM raster shorter than width*height")
        vals = np.frombuffer(raster, dtype=dtype, count=n).astype(float)
    else:
        body = re.sub(rb"#[^\n\r]*", b"", data[pos:]).split()
        if len(body) < n:
            raise PGMError("PGM raster shorter than width*height")
        try:
            vals = np.array([int(t) for t in body[:n]], dtype=float)
        except ValueError as exc:
            raise PGMError("non-integer PGM sample") from exc
    if vals.max(initial=0) > maxval:
        raise PGMError("PGM sample exceeds maxval")
    return vals.reshape(height, width) / maxval


def read_pgm(path) -> PixelGrid:
    with open(path, "rb") as fh:
        return PixelGrid(parse_pgm(fh.read()))


def to_uint8(image) -> np.ndarray:
    """[0, 1] floats to 8-bit grey levels, clipped and rounded."""
    return np.clip(np.rint(np.asarray(image, dtype=float) * 255.0), 0, 255).astype(np.uint8)


def write_pgm(path, image, binary: bool = True) -> None:
    """Write a [0, 1] image as an 8-bit P5 (or P2) PGM."""
    img = to_uint8(image)
    h, w = img.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(f"P5\n{w} {h}\n255\n".encode())
            fh.write(img.tobytes())
        else:
            fh.write(f"P2\n{w} {h}\n255\n".encode())
            for row in img:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode())


def psnr(reference, approx) -> float:
    """Peak signal-to-noise ratio in dB for [0, 1] images on the 0..255 scale."""
    a = 255.0 * np.asarray(reference, dtype=float)
    b = 255.0 * np.asarray(approx, dtype=float)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0**2 / mse)


def rasterize(tree, f: PixelGrid) -> np.ndarray:
    """Sample each leaf's affine approximant at the centres of its pixels."""
    out = np.zeros(f.values.shape)
    for lid in tree.leaves():
        node = tree.nodes[lid]
        px = node.pixels
        if px is None or len(px) == 0:
            continue
        out[px] = node.record.poly(f.centers[px])
    return out.reshape(f.height, f.width)


# --- SVG --------------------------------------------------------------------


def quadratic_class(T: Triangle, q: QuadraticForm) -> str:
    """``white`` if adapted to ``|q|``, ``grey`` if only to ``q``, else ``dark``.

    For a definite form ``rho_q = rho_{|q|}``, so grey never occurs.
    """
    try:
        r_abs = rho_q(T, abs_form(q))
    except SingularFormError:
        r_abs = math.inf
    if r_abs <= RHO_GOOD:
        return "white"
    try:
        r = rho_q(T, q)
    except SingularFormError:
        r = math.inf
    return "grey" if r <= RHO_GOOD else "dark"


def svg_mesh(triangles, fills=None, size: int = 512, stroke: str = "#000000") -> str:
    """SVG 1.1 document with one polygon per triangle, y axis pointing up."""
    tris = list(triangles)
    pts = np.vstack([T.points for T in tris]) if tris else np.zeros((1, 2))
    x0, y0 = pts.min(axis=0)
    x1, y1 = pts.max(axis=0)
    span = max(x1 - x0, y1 - y0) or 1.0
    s = size / span
    w, h = (x1 - x0) * s, (y1 - y0) * s
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.3f}" height="{h:.3f}" '
        f'viewBox="0 0 {w:.3f} {h:.3f}">',
    ]
    width = max(0.05, 0.5 / math.sqrt(max(len(tris), 1) / 64))
    for k, T in enumerate(tris):
        p = T.points
        coords = " ".join(f"{(x - x0) * s:.4f},{(y1 - y) * s:.4f}" for x, y in p)
        fill = escape(fills[k]) if fills is not None else "none"
        lines.append(f'<polygon points="{coords}" fill="{fill}" stroke="{stroke}" stroke-width="{width:.3f}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_svg(path, triangles, fills=None, size: int = 512) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg_mesh(triangles, fills, size))


def grey_fill(value: float) -> str:
    g = int(np.clip(round(value * 255.0), 0, 255))
    return f"#{g:02x}{g:02x}{g:02x}"


# --- CSV --------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows) -> None:
    """RFC 4180 CSV with CRLF line ends; floats written with full precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\r\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# --- mesh text --------------------------------------------------------------

MESH_HEADER = "# anisotri mesh v1"


def _num(x: float) -> str:
    return repr(float(x))


def mesh_text(tree) -> str:
    """Header ``n_roots n_nodes``; one line per node in id order:
    ``id parent x1 y1 x2 y2 x3 y3 kind apex`` (``-`` for leaves)."""
    out = [MESH_HEADER, f"{tree.n_roots} {tree.n_nodes}"]
    for nid in sorted(tree.nodes):
        n = tree.nodes[nid]
        xy = " ".join(_num(c) for c in n.tri.points.ravel())
        kind = n.kind if n.children is not None else "-"
        apex = str(n.apex) if n.children is not None else "-"
        out.append(f"{nid} {n.parent} {xy} {kind} {apex}")
    return "\n".join(out) + "\n"


def write_mesh(path, tree) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(mesh_text(tree))


def read_mesh(path) -> list[dict]:
    """Parse a mesh text file into one dict per node."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    n_roots, n_nodes = (int(t) for t in lines[0].split())
    nodes = []
    for ln in lines[1:]:
        t = ln.split()
        nodes.append(
            {
                "id": int(t[0]),
                "parent": int(t[1]),
                "vertices": tuple((float(t[2 + 2 * k]), float(t[3 + 2 * k])) for k in range(3)),
                "kind": None if t[8] == "-" else t[8],
                "apex": None if t[9] == "-" else int(t[9]),
            }
        )
    if len(nodes) != n_nodes or sum(1 for n in nodes if n["parent"] == -1) != n_roots:
        raise ValueError("mesh file header does not match its body")
    return nodes


# --- coefficient text -------------------------------------------------------


def coefficient_text(coeffs) -> str:
    """``kind node level c1 c2 c3`` per line; kind is ``scaling`` or ``wavelet``."""
    out = []
    for kind, table in (("scaling", coeffs.scaling), ("wavelet", coeffs.wavelet)):
        for nid in sorted(table):
            vals = " ".join(f"{v:.17g}" for v in table[nid])
            out.append(f"{kind} {nid} {coeffs.levels.get(nid, 0)} {vals}")
    return "\n".join(out) + "\n"


def write_coefficients(path, coeffs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(coefficient_text(coeffs))


def read_coefficients(path):
    from .wavelet import CoeffMap

    cm = CoeffMap()
    with open(path, encoding="utf-8") as fh:
        for ln in fh:
            t = ln.split()
            if not t:
                continue
            kind, nid, level = t[0], int(t[1]), int(t[2])
            vals = np.array([float(v) for v in t[3:6]])
            if kind == "scaling":
                cm.scaling[nid] = vals
            elif kind == "wavelet":
                cm.wavelet[nid] = vals
            else:
                raise ValueError(f"unknown coefficient kind {kind!r}")
            cm.levels[nid] = level
    return cm
