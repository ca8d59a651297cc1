"""Write the deterministic 512x512 synthetic test picture as a PGM."""

import argparse

from anisotri.experiments import synthetic_image
from anisotri.io import write_pgm


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", nargs="?", default="synthetic.pgm")
    ap.add_argument("--size", type=int, default=512)
    args = ap.parse_args()
    write_pgm(args.out, synthetic_image(args.size))
    print(args.out)


if __name__ == "__main__":
    main()
