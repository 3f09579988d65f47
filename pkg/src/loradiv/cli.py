"""Command-line front end: ``loradiv {theory,simulate,compare}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .linkbudget import BracketError, PathLossModel, range_factor, snr_gap_at_ber
from .montecarlo import SimConfig, run_sweep, theory_ber_for
from .records import (
    OUTPUT_DIR_ENV,
    SIM_COLUMNS,
    THEORY_COLUMNS,
    atomic_write,
    build_manifest,
    config_from_manifest,
    now_iso,
    read_curve,
    render_csv,
    render_json,
    sim_rows,
    theory_rows,
)
from .theory import TheoryDetector, theory_curve

log = logging.getLogger("loradiv")

SF_CHOICES = range(7, 13)
DEFAULT_COMPARE_GRID = "-40:0.25:40"


class UsageError(Exception):
    pass


def parse_grid(text: str) -> list[float]:
    """``start:step:stop`` (stop included when reachable within 1e-9), ``a,b,c`` or a single value."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"bad SNR grid {text!r}; expected start:step:stop")
        start, step, stop = (float(p) for p in parts)
        if not step > 0:
            raise UsageError(f"SNR grid step must be positive, got {step}")
        if stop < start:
            raise UsageError(f"SNR grid stop {stop} is below start {start}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad SNR value in {text!r}") from None
    if not values:
        raise UsageError("empty SNR grid")
    return values


def _fix_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "--snr -30:1:0" as two options; glue the value on
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a == "--snr" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--snr={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def _emit(text: str, out: str | None, default_name: str) -> str | None:
    """Write ``text`` to --out, the env output dir, or stdout; return the path used."""
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        out = str(Path(os.environ[OUTPUT_DIR_ENV]) / default_name)
    if out is None or out == "-":
        sys.stdout.write(text)
        return None
    atomic_write(out, text)
    return out


def cmd_theory(args) -> int:
    sf = args.sf
    grid = parse_grid(args.snr)
    if sorted(grid) != grid:
        raise UsageError("SNR grid must be ascending")
    points = theory_curve(args.detector, 1 << sf, args.l, grid)
    rows = theory_rows(points)
    if args.format == "csv":
        text = render_csv(rows, THEORY_COLUMNS)
    else:
        text = render_json("theory", rows)
    _emit(text, args.out, f"theory_{args.detector}_sf{sf}_l{args.l}.{args.format}")
    return 0


def _sim_config(args) -> SimConfig:
    grid = parse_grid(args.snr)
    return SimConfig(
        spreading_factor=args.sf,
        num_antennas=args.l,
        detector=args.detector,
        channel=args.channel,
        snr_db=tuple(grid),
        trials=args.trials,
        target_errors=args.target_errors,
        max_symbols=args.max_symbols,
        tau_c=args.tau_c,
        n_max=args.n_max,
        seed=args.seed,
        bit_mapping=args.bit_mapping,
    )


def cmd_simulate(args) -> int:
    if args.from_manifest:
        manifest = json.loads(Path(args.from_manifest).read_text())
        cfg = config_from_manifest(manifest)
        with_theory = manifest.get("with_theory", False)
        fmt = args.format or manifest.get("format", "csv")
    else:
        if args.snr is None:
            raise UsageError("--snr is required (or use --from-manifest)")
        cfg = _sim_config(args)
        with_theory = args.with_theory
        fmt = args.format or "csv"
    if with_theory and theory_ber_for(cfg, 0.0) is None:
        print(
            f"warning: no analytical BER for {cfg.detector.value} detection over "
            f"{cfg.channel.value}; theory_ber column left empty",
            file=sys.stderr,
        )

    started = now_iso()
    curve = run_sweep(cfg, jobs=args.jobs, with_theory=with_theory)
    finished = now_iso()

    rows = sim_rows(curve)
    text = render_csv(rows, SIM_COLUMNS) if fmt == "csv" else render_json("simulation", rows, config=cfg.to_dict())
    name = f"sim_{cfg.detector.value}_{cfg.channel.value}_sf{cfg.spreading_factor}_l{cfg.num_antennas}.{fmt}"
    path = _emit(text, args.out, name)
    manifest = build_manifest(
        curve, started=started, finished=finished, with_theory=with_theory, fmt=fmt, output=path
    )
    manifest_text = json.dumps(manifest, indent=2) + "\n"
    manifest_path = args.manifest or (f"{path}.manifest.json" if path else None)
    if manifest_path:
        atomic_write(manifest_path, manifest_text)
    else:
        sys.stderr.write(manifest_text)
    return 0


def _load_compare_curve(spec: str, grid: str):
    """A curve file path, or an inline theory spec like ``coh-awgn:sf=10:l=4``."""
    if Path(spec).exists():
        return read_curve(spec)
    kind, *items = spec.split(":")
    if kind not in {d.value for d in TheoryDetector}:
        raise UsageError(f"{spec!r} is neither a curve file nor an inline spec like coh-awgn:sf=10:l=1")
    opts = {"sf": "10", "l": "1"}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or key not in opts:
            raise UsageError(f"bad inline option {item!r} in {spec!r}; expected sf=N or l=N")
        opts[key] = value
    sf, L = int(opts["sf"]), int(opts["l"])
    if sf not in SF_CHOICES:
        raise UsageError(f"sf must be in 7..12, got {sf}")
    pts = theory_curve(kind, 1 << sf, L, parse_grid(grid))
    return [p.snr_db for p in pts], [p.ber for p in pts]


def cmd_compare(args) -> int:
    a = _load_compare_curve(args.curve_a, args.snr)
    b = _load_compare_curve(args.curve_b, args.snr)
    model = PathLossModel(args.ref_loss, args.exponent, args.d0)
    try:
        gap = snr_gap_at_ber(a, b, args.target_ber)
    except BracketError as exc:
        raise UsageError(f"{exc}; widen the SNR range or pick another --target-ber") from None
    factor = range_factor(gap, model)
    gap_txt = 0.0 if abs(gap) < 0.05 else gap
    print(f"gap {gap_txt:.1f} dB, range ×{factor:.2f}")
    print(
        f"  target BER {args.target_ber:g}; SNR gap {gap:.3f} dB; path loss "
        f"{model.reference_loss_db:g} + 10*{model.exponent:g}*log10(d/{model.reference_distance_km:g} km)"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loradiv", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    th = sub.add_parser("theory", help="analytical SER/BER curve")
    th.add_argument("--detector", required=True, choices=[d.value for d in TheoryDetector])
    th.add_argument("--sf", type=int, required=True, choices=SF_CHOICES)
    th.add_argument("--l", type=int, default=1)
    th.add_argument("--snr", required=True, help="start:step:stop, a,b,c or a single value (dB)")
    th.add_argument("--out")
    th.add_argument("--format", choices=("csv", "json"), default="csv")
    th.set_defaults(func=cmd_theory)

    sim = sub.add_parser("simulate", help="Monte Carlo BER sweep")
    sim.add_argument("--detector", choices=("coh", "noncoh", "semicoh"), default="noncoh")
    sim.add_argument("--channel", choices=("awgn", "rayleigh"), default="rayleigh")
    sim.add_argument("--sf", type=int, choices=SF_CHOICES, default=7)
    sim.add_argument("--l", type=int, default=1)
    sim.add_argument("--snr")
    sim.add_argument("--trials", type=int, default=100_000, help="minimum symbols per point")
    sim.add_argument("--target-errors", type=int, default=100, help="minimum bit errors per point")
    sim.add_argument("--max-symbols", type=int, default=10_000_000)
    sim.add_argument("--tau-c", type=int, default=10)
    sim.add_argument("--n-max", type=int, default=50)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--jobs", type=int, default=1)
    sim.add_argument("--bit-mapping", choices=("binary", "gray"), default="binary")
    sim.add_argument("--with-theory", action="store_true")
    sim.add_argument("--out")
    sim.add_argument("--format", choices=("csv", "json"))
    sim.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    sim.add_argument("--from-manifest", help="re-run exactly the config recorded in a manifest")
    sim.set_defaults(func=cmd_simulate)

    cmp_ = sub.add_parser("compare", help="SNR gap and coverage factor between two curves")
    cmp_.add_argument("curve_a", help="curve file or inline spec, e.g. coh-awgn:sf=10:l=1")
    cmp_.add_argument("curve_b")
    cmp_.add_argument("--target-ber", type=float, default=1e-4)
    cmp_.add_argument("--snr", default=DEFAULT_COMPARE_GRID, help="grid for inline specs")
    cmp_.add_argument("--exponent", type=float, default=2.0)
    cmp_.add_argument("--d0", type=float, default=1.0)
    cmp_.add_argument("--ref-loss", type=float, default=91.22)
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = _fix_negative_values(list(sys.argv[1:] if argv is None else argv))
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"loradiv {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
