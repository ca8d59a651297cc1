"""Refine an equilateral triangle J times for a quadratic form and report
how many triangles of the final level are adapted (rho_q <= 4 sqrt 3)."""

import argparse

from anisotri.experiments import run_quadratic_demo
from anisotri.geometry import QuadraticForm
from anisotri.refine import RefineConfig


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--J", type=int, default=8)
    ap.add_argument("--out", default="out/quadratic")
    ap.add_argument("--rule", default="greedy", choices=("greedy", "modified", "newest"))
    args = ap.parse_args()
    for name, q in (("x2+100y2", QuadraticForm(1.0, 0.0, 100.0)), ("x2-10y2", QuadraticForm(1.0, 0.0, -10.0))):
        stats = run_quadratic_demo(q, args.J, f"{args.out}/{name}", rcfg=RefineConfig(rule=args.rule))
        print(
            f"{name}: rho_q good {stats['frac_rho_q_good']:.1%}  "
            f"white {stats['frac_white']:.1%} grey {stats['frac_grey']:.1%} dark {stats['frac_dark']:.1%}"
        )


if __name__ == "__main__":
    main()
