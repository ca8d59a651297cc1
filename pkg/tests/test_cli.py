import json

import numpy as np
import pytest

from anisotri import experiments as ex
from anisotri.cli import main
from anisotri.io import read_csv, read_mesh, write_pgm
from anisotri.tree import read_bitstream

DETERMINISTIC = ("mesh.txt", "tree.atb", "mesh.svg", "convergence.csv")


def run(argv, capsys):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


def test_greedy_is_byte_identical_across_runs(tmp_path, capsys):
    outs = []
    for k in range(2):
        out = tmp_path / str(k)
        res = run(["greedy", "--source", "sharp:0.2", "--stop", "leaves:200", "--out", str(out)], capsys)
        assert res["n_leaves"] == 200
        outs.append(out)
    for name in DETERMINISTIC:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    assert len(read_mesh(outs[0] / "mesh.txt")) == 2 * 200 - 2
    header, rows = read_csv(outs[0] / "convergence.csv")
    assert len(rows) == 198
    assert read_bitstream(outs[0] / "tree.atb").n_roots == 2


def test_hierarchy_j0_is_single_triangle(tmp_path, capsys):
    res = run(["hierarchy", "--J", "0", "--out", str(tmp_path)], capsys)
    assert res["n_triangles"] == 1
    assert (tmp_path / "quadratic.svg").read_text().count("<polygon") == 1


def test_hierarchy_quadratic_classes(tmp_path, capsys):
    res = run(["hierarchy", "--q", "1,0,100", "--J", "6", "--out", str(tmp_path)], capsys)
    assert res["frac_white"] + res["frac_grey"] + res["frac_dark"] == pytest.approx(1.0)


def test_cart_and_wavelet_commands(tmp_path, capsys):
    res = run(["cart", "--stop", "leaves:300", "--lambda", "1e-5", "--out", str(tmp_path)], capsys)
    assert res["pruned_leaves"] <= res["grown_leaves"]
    assert (tmp_path / "pruned.atb").exists()
    res = run(["wavelet", "--J", "5", "--eps", "1e-3", "--out", str(tmp_path)], capsys)
    assert res["l2_error"] >= 0
    assert (tmp_path / "coefficients.txt").exists()


def test_constant_image_has_zero_error(tmp_path, capsys):
    pgm = tmp_path / "c.pgm"
    write_pgm(pgm, np.full((32, 32), 100 / 255.0))
    res = run(["image", str(pgm), "--N", "50", "--rules", "greedy,newest", "--out", str(tmp_path)], capsys)
    assert res["greedy"]["psnr"] == float("inf") or res["greedy"]["psnr"] > 200
    assert (tmp_path / "approx_greedy.pgm").read_bytes() == pgm.read_bytes()


def test_sup_norm_option(tmp_path, capsys):
    res = run(["greedy", "--p", "inf", "--stop", "leaves:50", "--out", str(tmp_path)], capsys)
    assert res["n_leaves"] == 50


def test_bad_arguments():
    with pytest.raises(SystemExit):
        main(["greedy", "--rule", "bogus"])
    with pytest.raises(ValueError):
        ex.parse_stop("sometimes:3")
    with pytest.raises(ValueError):
        ex.parse_source("nothing")
    with pytest.raises(ValueError):
        ex.ExperimentSpec("bogus")
