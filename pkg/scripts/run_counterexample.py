"""Greedy bisection on the L2 counterexample: the pure greedy rule stalls,
the modified rule converges."""

import argparse

from anisotri.approx import ApproxConfig
from anisotri.geometry import REFERENCE_TRIANGLE
from anisotri.refine import RefineConfig
from anisotri.sources import CounterexampleL2
from anisotri.tree import BisectionTree, MaxLeaves, global_error, grow


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, default=256)
    ap.add_argument("--theta", type=float, default=2.0 / 3.0)
    args = ap.parse_args()
    f = CounterexampleL2()
    rules = {
        "greedy": RefineConfig(rule="greedy", tie_rule="lex_min"),
        "modified": RefineConfig(rule="modified", theta=args.theta, tie_rule="lex_min"),
    }
    trees = {k: BisectionTree([REFERENCE_TRIANGLE], f, ApproxConfig()) for k in rules}
    e0 = global_error(trees["greedy"])
    print(f"{'N':>6} {'greedy':>10} {'modified':>10}   (relative L2 error)")
    N = 2
    while N <= args.N:
        errs = []
        for k, rcfg in rules.items():
            grow(trees[k], rcfg, MaxLeaves(N))
            errs.append(global_error(trees[k]) / e0)
        print(f"{N:>6} {errs[0]:10.4f} {errs[1]:10.4f}")
        N *= 2


if __name__ == "__main__":
    main()
