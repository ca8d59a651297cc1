import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from anisotri.approx import ApproxConfig
from anisotri.geometry import QuadraticForm, Triangle, equilateral, rectangle_split, unit_square_split
from anisotri.io import (
    PGMError,
    coefficient_text,
    parse_pgm,
    psnr,
    quadratic_class,
    rasterize,
    read_coefficients,
    read_csv,
    read_mesh,
    read_pgm,
    svg_mesh,
    to_uint8,
    write_coefficients,
    write_csv,
    write_mesh,
    write_pgm,
)
from anisotri.refine import RefineConfig, build_hierarchy
from anisotri.sources import PixelGrid, SharpTransition
from anisotri.tree import MaxLeaves, greedy_grow
from anisotri.wavelet import decompose

SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.mark.parametrize("binary", [True, False])
def test_pgm_roundtrip(tmp_path, binary):
    img = np.random.default_rng(1).integers(0, 256, (7, 11)) / 255.0
    path = tmp_path / "a.pgm"
    write_pgm(path, img, binary=binary)
    f = read_pgm(path)
    assert (f.height, f.width) == (7, 11)
    np.testing.assert_array_equal(to_uint8(f.values.reshape(7, 11)), to_uint8(img))


def test_pgm_comments_and_16_bit():
    ascii_ = b"P2\n# a comment\n2 2 # trailing\n4\n0 1\n# mid\n2 4\n"
    np.testing.assert_allclose(parse_pgm(ascii_), [[0, 0.25], [0.5, 1]])
    raw = b"P5\n2 1\n65535\n" + np.array([0, 65535], dtype=">u2").tobytes()
    np.testing.assert_allclose(parse_pgm(raw), [[0.0, 1.0]])


@pytest.mark.parametrize(
    "data",
    [
        b"P6\n1 1\n255\n\x00",
        b"P5\n2 2\n255\n\x00",
        b"P2\n2 1\n3\n1 9\n",
        b"P2\n0 1\n255\n",
        b"P2\n1 1\n70000\n0\n",
        b"P2\nx 1\n255\n0\n",
        b"P2\n2",
    ],
)
def test_malformed_pgm(data):
    with pytest.raises(PGMError):
        parse_pgm(data)


def test_psnr():
    a = np.zeros((4, 4))
    assert psnr(a, a) == math.inf
    b = a + 1 / 255.0
    assert psnr(a, b) == pytest.approx(20 * math.log10(255.0))


def test_rasterize_constant_image_is_exact():
    f = PixelGrid(np.full((16, 16), 0.3))
    tree = greedy_grow(f, unit_square_split(), stop=MaxLeaves(8))
    np.testing.assert_allclose(rasterize(tree, f), 0.3, atol=1e-12)


def test_rasterize_covers_every_pixel():
    img = np.random.default_rng(2).uniform(size=(20, 20))
    f = PixelGrid(img)
    tree = greedy_grow(f, unit_square_split(), stop=MaxLeaves(30))
    owned = np.concatenate([tree.nodes[i].pixels for i in tree.leaves()])
    assert np.array_equal(np.sort(owned), np.arange(400))
    assert psnr(img, rasterize(tree, f)) > 0


def test_quadratic_classes():
    assert quadratic_class(equilateral(), QuadraticForm(1, 0, 1)) == "white"
    # adapted to q but not to |q|: a null-cone sliver
    T = Triangle(((0, 0), (10, 10), (10.1, 9.9)))
    assert quadratic_class(T, QuadraticForm(1, 0, -1)) in ("grey", "dark")
    assert quadratic_class(Triangle(((0, 0), (100, 0), (0, 0.01))), QuadraticForm(1, 0, 1)) == "dark"


def test_svg_is_well_formed_with_one_polygon_per_leaf():
    f = SharpTransition(0.2)
    tree = greedy_grow(f, rectangle_split(*f.domain), stop=MaxLeaves(40))
    leaves = [tree.nodes[i].tri for i in tree.leaves()]
    root = ET.fromstring(svg_mesh(leaves, ["#ffffff"] * len(leaves)).encode())
    assert root.tag == SVG_NS + "svg" and root.get("version") == "1.1"
    polys = root.findall(SVG_NS + "polygon")
    assert len(polys) == 40
    # y axis points up: the origin maps to the bottom edge
    h = float(root.get("height"))
    first = [tuple(map(float, p.split(","))) for p in polys[0].get("points").split()]
    assert all(0 <= y <= h + 1e-9 for _, y in first)


def test_csv_is_deterministic_and_roundtrips(tmp_path):
    rows = [(1, 0.1, "a"), (2, 1e-300, "b,c")]
    p1, p2 = tmp_path / "1.csv", tmp_path / "2.csv"
    write_csv(p1, ["n", "x", "s"], rows)
    write_csv(p2, ["n", "x", "s"], rows)
    assert p1.read_bytes() == p2.read_bytes()
    assert b"\r\n" in p1.read_bytes()
    header, body = read_csv(p1)
    assert header == ["n", "x", "s"]
    assert float(body[0][1]) == 0.1 and body[1][2] == "b,c"


def test_mesh_roundtrip(tmp_path):
    f = SharpTransition(0.2)
    tree = greedy_grow(f, rectangle_split(*f.domain), stop=MaxLeaves(20))
    path = tmp_path / "mesh.txt"
    write_mesh(path, tree)
    nodes = read_mesh(path)
    assert len(nodes) == tree.n_nodes
    for d in nodes:
        n = tree.nodes[d["id"]]
        assert d["vertices"] == n.tri.vertices and d["parent"] == n.parent
        assert (d["apex"] is None) == (n.children is None)


def test_coefficient_text_roundtrip(tmp_path):
    f = SharpTransition(0.2)
    H = build_hierarchy(f, rectangle_split(*f.domain), 4, ApproxConfig(), RefineConfig(rule="modified"))
    c = decompose(f, H.tree)
    path = tmp_path / "c.txt"
    write_coefficients(path, c)
    back = read_coefficients(path)
    assert coefficient_text(back) == coefficient_text(c)
    for nid, v in c.wavelet.items():
        np.testing.assert_array_equal(back.wavelet[nid], v)
