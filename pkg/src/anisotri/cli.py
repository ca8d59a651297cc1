"""``anisotri`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import experiments as ex
from .approx import ApproxConfig
from .geometry import QuadraticForm
from .refine import RefineConfig


def _p(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def _common(sp: argparse.ArgumentParser, rule: str = "modified") -> None:
    sp.add_argument("--out", default="out", help="output directory")
    sp.add_argument("--m", type=int, default=1, help="polynomial degree")
    sp.add_argument("--p", type=_p, default=2.0, help="error exponent (inf allowed)")
    sp.add_argument("--rule", choices=("greedy", "modified", "newest"), default=rule)
    sp.add_argument("--metric", choices=("l2_proj", "lp_proj", "l1_interp", "lp_interp"), default="l2_proj")
    sp.add_argument("--theta", type=float, default=2.0 / 3.0)
    sp.add_argument("--seed", type=int, default=0, help="unused by the deterministic core")


def _configs(args) -> tuple[ApproxConfig, RefineConfig]:
    acfg = ApproxConfig(m=args.m, p=args.p)
    rcfg = RefineConfig(metric=args.metric, metric_p=args.p, rule=args.rule, theta=args.theta)
    return acfg, rcfg


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="anisotri", description="Greedy anisotropic bisection experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("hierarchy", help="refine an equilateral triangle for a quadratic form")
    _common(sp, rule="greedy")
    sp.add_argument("--q", default="1,0,100", help="q11,q12,q22 of q = q11 x^2 + 2 q12 xy + q22 y^2")
    sp.add_argument("--J", type=int, default=8)

    sp = sub.add_parser("greedy", help="greedy tree approximation")
    _common(sp)
    sp.add_argument("--source", default="sharp:0.2")
    sp.add_argument("--stop", default="leaves:1024", help="leaves:N | local:EPS | global:EPS")

    sp = sub.add_parser("cart", help="grow then CART-prune")
    _common(sp)
    sp.add_argument("--source", default="sharp:0.2")
    sp.add_argument("--stop", default="leaves:4096")
    sp.add_argument("--lambda", dest="lam", type=float, default=1e-6)

    sp = sub.add_parser("wavelet", help="multiscale decomposition and thresholding")
    _common(sp)
    sp.add_argument("--source", default="sharp:0.2")
    sp.add_argument("--J", type=int, default=8)
    sp.add_argument("--eps", type=float, default=1e-3)

    sp = sub.add_parser("image", help="greedy approximation of a PGM image")
    _common(sp)
    sp.add_argument("pgm")
    sp.add_argument("--N", type=int, default=2000)
    sp.add_argument("--rules", default="newest,greedy,modified")

    sp = sub.add_parser("sharp-table", help="approximation constants for the sharp transition")
    _common(sp)
    sp.add_argument("--deltas", default="0.2,0.1,0.05,0.02")
    sp.add_argument("--N", type=int, default=8192)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    acfg, rcfg = _configs(args)
    if args.command == "hierarchy":
        q = QuadraticForm(*(float(v) for v in args.q.split(",")))
        result = ex.run_quadratic_demo(q, args.J, args.out, acfg, rcfg)
    elif args.command == "image":
        result = ex.run_image(args.pgm, args.N, tuple(args.rules.split(",")), args.out, acfg, args.theta)
    elif args.command == "sharp-table":
        deltas = [float(d) for d in args.deltas.split(",")]
        result = ex.run_sharp_table(deltas, args.N, args.out, acfg, args.theta)
    else:
        spec = ex.ExperimentSpec(
            args.command,
            source=args.source,
            acfg=acfg,
            rcfg=rcfg,
            stop=ex.parse_stop(getattr(args, "stop", "leaves:1")),
            lam=getattr(args, "lam", 0.0),
            eps=getattr(args, "eps", 0.0),
            outdir=args.out,
        )
        runner = {"greedy": ex.run_greedy, "cart": ex.run_cart, "wavelet": lambda s: ex.run_wavelet(s, args.J)}
        result = runner[args.command](spec)
    json.dump(result, sys.stdout, indent=2, default=float)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
