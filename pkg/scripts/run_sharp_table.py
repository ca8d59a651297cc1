"""Uniform, isotropic-adaptive and anisotropic constants N * error for the
sharp transition at several widths, plus the Hessian functionals U, I, A."""

import argparse

from anisotri.experiments import SHARP_DELTAS, run_sharp_table


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--deltas", default=",".join(str(d) for d in SHARP_DELTAS))
    ap.add_argument("--N", type=int, default=8192)
    ap.add_argument("--theta", type=float, default=2.0 / 3.0)
    ap.add_argument("--out", default="out/sharp")
    args = ap.parse_args()
    rows = run_sharp_table([float(d) for d in args.deltas.split(",")], args.N, args.out, theta=args.theta)
    print(f"{'delta':>6} {'U':>9} {'I':>8} {'A':>7} {'C_U':>9} {'C_I':>7} {'C_A':>7} {'sec':>5}")
    for r in rows:
        print(
            f"{r['delta']:>6} {r['U']:9.2f} {r['I']:8.2f} {r['A']:7.2f} "
            f"{r['C_U']:9.2f} {r['C_I']:7.2f} {r['C_A']:7.3f} {r['seconds']:5.0f}"
        )


if __name__ == "__main__":
    main()
