"""Approximate a PGM image with N triangles under each refinement rule and
report PSNR and encoded size."""

import argparse
from pathlib import Path

from anisotri.experiments import run_image, synthetic_image
from anisotri.io import write_pgm


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("pgm", nargs="?", help="input image; the synthetic picture when omitted")
    ap.add_argument("--N", type=int, default=2000)
    ap.add_argument("--rules", default="newest,greedy,modified")
    ap.add_argument("--out", default="out/image")
    args = ap.parse_args()
    path = args.pgm
    if path is None:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        path = Path(args.out) / "synthetic.pgm"
        write_pgm(path, synthetic_image(512))
    res = run_image(path, args.N, tuple(args.rules.split(",")), args.out)
    for rule, r in res.items():
        print(f"{rule:>9}: PSNR {r['psnr']:6.2f} dB  {r['bits']} bits  {r['seconds']:.1f}s")


if __name__ == "__main__":
    main()
