"""Sensing table: compute at a reference trap frequency, fit w_t from the
(N=2, 0.1 kHz) quantum-limited force, recompute and compare with reference values."""

import argparse
import math

from parachain.sensing import fit_trap_frequency, sensing_table

REFERENCE = {
    (2, 100.0): (1e-3, 9.66, 0.30, 80.9, 2.48),
    (2, 1000.0): (1e-4, 96.6, 0.93, 809.0, 7.85),
    (2, 10000.0): (1e-5, 966.0, 2.96, 8090.0, 24.8),
    (10, 100.0): (3e-2, 5.8, 1.05, 28.5, 5.18),
    (10, 1000.0): (3e-3, 58.0, 3.34, 285.0, 16.4),
    (10, 10000.0): (3e-4, 580.0, 10.5, 2850.0, 51.8),
    (30, 100.0): (1.4e-1, 2.23, 0.84, 2.60, 0.98),
    (30, 1000.0): (1.4e-2, 22.3, 2.67, 26.0, 3.11),
    (30, 10000.0): (1.4e-3, 223.0, 8.46, 260.0, 9.84),
}
YN = 1e-24


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reference-trap-hz", type=float, default=2.0e6)
    ap.add_argument("--threads", type=int, default=3)
    args = ap.parse_args()

    first = sensing_table(sizes=(2,), scales_hz=(100.0,), trap_frequency_hz=args.reference_trap_hz)[0]
    w_fit = fit_trap_frequency(9.66 * YN, first.f_min_quantum, args.reference_trap_hz)
    print(f"F_q(N=2, 0.1 kHz) at w_t = 2pi*{args.reference_trap_hz / 1e6:g} MHz: "
          f"{first.f_min_quantum / YN:.3f} yN -> fitted w_t = 2pi*{w_fit / 1e6:.4f} MHz")
    rows = sensing_table(trap_frequency_hz=w_fit, threads=args.threads)
    hdr = f"{'N':>3} {'kHz':>5} | {'tau [s]':>17} | {'F_q':>15} | {'S_q':>13} | {'F_qc':>15} | {'S_qc':>13}"
    print(hdr)
    print("-" * len(hdr))
    for r in rows:
        ref = REFERENCE[(r.n_sites, r.scale_hz)]
        got = (r.tau, r.f_min_quantum / YN, r.sensitivity_quantum / YN,
               r.f_min_total / YN, r.sensitivity_total / YN)
        cells = [f"{g:8.3g} ({w:<6g})" for g, w in zip(got, ref)]
        print(f"{r.n_sites:>3} {r.scale_hz / 1000:>5g} | " + " | ".join(cells))
    print("values: computed (reference); forces in yN, sensitivities in yN/sqrt(Hz)")
    tau2 = next(r.tau for r in rows if r.n_sites == 2) * 2 * math.pi * 100.0
    print(f"N=2 relaxation time in units of 1/J_c: {tau2:.3f} (reference row implies "
          f"{1e-3 * 2 * math.pi * 100:.3f})")


if __name__ == "__main__":
    main()
