"""Critical loss of the winding transition (dphi = pi/4, J = Delta = g = 1, w = 0)
as a function of the dipolar hopping cutoff used in the Bloch sums."""

import argparse
import math

from parachain.model import ChainParams
from parachain.topology import find_winding_transition


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ranges", type=int, nargs="*", default=[1, 2, 3, 4, 5, 10, 30, 100, 1000])
    args = ap.parse_args()
    base = ChainParams(2, 1.0, 1.0, 1.0, math.pi / 4)
    print(f"{'range':>8} {'gamma_c':>12}")
    for r in args.ranges:
        p = base.replace(n_sites=r + 1, hopping_range=r)
        print(f"{r:>8} {find_winding_transition(p, 1.5, 2.2, xtol=1e-9):12.7f}")
    print(f"{'full':>8} {find_winding_transition(base, 1.5, 2.2, xtol=1e-9):12.7f}")


if __name__ == "__main__":
    main()
