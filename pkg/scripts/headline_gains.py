#!/usr/bin/env python3
"""SNR gain and coverage factor of L antennas over one, from the analytical curves."""

import argparse

import numpy as np

from loradiv.linkbudget import PathLossModel, range_factor, snr_gap_at_ber
from loradiv.theory import TheoryDetector, theory_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sf", type=int, default=10)
    ap.add_argument("--antennas", type=int, default=4)
    ap.add_argument("--target-ber", type=float, default=1e-4)
    ap.add_argument("--exponent", type=float, default=2.0)
    args = ap.parse_args()

    grid = np.round(np.arange(-40.0, 40.01, 0.1), 10)
    model = PathLossModel(exponent=args.exponent)
    for det in TheoryDetector:
        one = theory_curve(det, 1 << args.sf, 1, grid)
        many = theory_curve(det, 1 << args.sf, args.antennas, grid)
        gap = snr_gap_at_ber(one, many, args.target_ber)
        print(f"{det.value:16s} L=1 -> {args.antennas}: gap {gap:6.2f} dB, range x{range_factor(gap, model):.2f}")


if __name__ == "__main__":
    main()
