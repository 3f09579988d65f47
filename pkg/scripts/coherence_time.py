#!/usr/bin/env python3
"""Effect of the coherence length tau_c on semi-coherent detection.

Sweeps semi-coherent and non-coherent detection for each tau_c and reports the
SNR each needs to reach the target BER.
"""

import argparse
import logging
from pathlib import Path

import numpy as np

from loradiv.linkbudget import BracketError, snr_at_ber
from loradiv.montecarlo import Detector, SimConfig, run_sweep_detectors
from loradiv.records import SIM_COLUMNS, atomic_write, render_csv, sim_rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sf", type=int, default=7)
    ap.add_argument("--antennas", type=int, default=4)
    ap.add_argument("--tau-c", type=int, nargs="+", default=[5, 10, 20])
    ap.add_argument("--snr", type=float, nargs=3, default=[-14.0, 1.0, -7.0], metavar=("START", "STEP", "STOP"))
    ap.add_argument("--trials", type=int, default=1_000_000)
    ap.add_argument("--target-ber", type=float, default=1e-3)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out-dir", default="results/coherence_time")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    start, step, stop = args.snr
    grid = tuple(np.arange(start, stop + 1e-9, step))
    out = Path(args.out_dir)
    for tau in args.tau_c:
        cfg = SimConfig(args.sf, args.antennas, "semicoh", "rayleigh", grid,
                        trials=args.trials, target_errors=0, tau_c=tau, seed=args.seed)
        curves = run_sweep_detectors(cfg, [Detector.SEMICOHERENT, Detector.NONCOHERENT], jobs=args.jobs)
        for det, curve in curves.items():
            atomic_write(out / f"sim_{det.value}_sf{args.sf}_l{args.antennas}_tau{tau}.csv",
                         render_csv(sim_rows(curve), SIM_COLUMNS))
        try:
            semi = snr_at_ber(curves[Detector.SEMICOHERENT].snr_db, curves[Detector.SEMICOHERENT].ber, args.target_ber)
            nc = snr_at_ber(curves[Detector.NONCOHERENT].snr_db, curves[Detector.NONCOHERENT].ber, args.target_ber)
            print(f"tau_c={tau}: semi-coherent {semi:.2f} dB, non-coherent {nc:.2f} dB, gain {nc - semi:.2f} dB")
        except BracketError as exc:
            print(f"tau_c={tau}: {exc}")


if __name__ == "__main__":
    main()
