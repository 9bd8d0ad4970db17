"""Onset of stability in gamma versus chain length (dphi = pi/4, J = Delta = g = 1)."""

import argparse
import math

from parachain.model import ChainParams
from parachain.steadystate import stability_boundary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="*", default=[2, 5, 10, 15, 20, 25, 30, 40, 50, 60])
    args = ap.parse_args()
    print(f"{'N':>4} {'gamma_stable':>13}")
    for n in args.sizes:
        p = ChainParams(n, 1.0, 1.0, 1.7, math.pi / 4)
        try:
            gb = stability_boundary(p, 0.05, 3.0, xtol=1e-7)
            print(f"{n:>4} {gb:13.6f}")
        except Exception as exc:  # small chains can be stable at any loss in the bracket
            print(f"{n:>4} {'-':>13}  ({exc})")


if __name__ == "__main__":
    main()
