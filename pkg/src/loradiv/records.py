"""CSV/JSON serialization of curves and run manifests."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Iterable

from . import __version__
from .montecarlo import BerCurve, BerPoint, SimConfig
from .theory import TheoryPoint

SIM_COLUMNS = (
    "detector", "channel", "sf", "l", "snr_db", "symbols", "sym_errs", "bit_errs",
    "ser", "ber", "ci95_lo", "ci95_hi", "theory_ber", "mean_iters",
)
THEORY_COLUMNS = ("detector", "sf", "l", "snr_db", "ser", "ber")

OUTPUT_DIR_ENV = "LORADIV_OUTPUT_DIR"


def _num(x):
    if x is None:
        return None
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def sim_rows(curve: BerCurve) -> list[dict]:
    cfg = curve.config
    return [
        {
            "detector": cfg.detector.value,
            "channel": cfg.channel.value,
            "sf": cfg.spreading_factor,
            "l": cfg.num_antennas,
            "snr_db": _num(p.snr_db),
            "symbols": p.symbols_tested,
            "sym_errs": p.symbol_errors,
            "bit_errs": p.bit_errors,
            "ser": p.ser,
            "ber": p.ber,
            "ci95_lo": p.ci95_low,
            "ci95_hi": p.ci95_high,
            "theory_ber": p.theory_ber,
            "mean_iters": p.mean_iters,
        }
        for p in curve.points
    ]


def theory_rows(points: Iterable[TheoryPoint]) -> list[dict]:
    return [
        {
            "detector": p.detector.value,
            "sf": p.M.bit_length() - 1,
            "l": p.L,
            "snr_db": _num(p.snr_db),
            "ser": p.ser,
            "ber": p.ber,
        }
        for p in points
    ]


def render_csv(rows: list[dict], columns: tuple[str, ...]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row[k] is None else row[k]) for k in columns})
    return buf.getvalue()


def render_json(kind: str, rows: list[dict], **extra) -> str:
    doc = {"kind": kind, "version": __version__, **extra, "points": rows}
    return json.dumps(doc, indent=2) + "\n"


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write via a temp file and rename so a failed run never leaves a partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def now_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def point_record(p: BerPoint) -> dict:
    return {
        "snr_db": _num(p.snr_db),
        "symbols_tested": p.symbols_tested,
        "symbol_errors": p.symbol_errors,
        "bit_errors": p.bit_errors,
        "ser": p.ser,
        "ber": p.ber,
        "ber_from_ser": p.ber_from_ser,
        "ci95_low": p.ci95_low,
        "ci95_high": p.ci95_high,
        "theory_ber": p.theory_ber,
        "mean_iters": p.mean_iters,
    }


def build_manifest(
    curve: BerCurve, *, started: str, finished: str, with_theory: bool, fmt: str, output: str | None
) -> dict:
    return {
        "tool": "loradiv",
        "version": __version__,
        "command": "simulate",
        "config": curve.config.to_dict(),
        "seed": curve.config.seed,
        "with_theory": with_theory,
        "format": fmt,
        "output": output,
        "started": started,
        "finished": finished,
        "points": [point_record(p) for p in curve.points],
    }


def config_from_manifest(manifest: dict) -> SimConfig:
    return SimConfig.from_dict(manifest["config"])


def load_schema(name: str) -> dict:
    return json.loads(resources.files("loradiv").joinpath("schemas", name).read_text())


def read_curve(path: str | os.PathLike) -> tuple[list[float], list[float]]:
    """(snr_db, ber) columns from a CSV or JSON curve written by this package."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        rows = json.loads(text)["points"]
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    try:
        return [float(r["snr_db"]) for r in rows], [float(r["ber"]) for r in rows]
    except KeyError as exc:
        raise ValueError(f"{path}: missing column {exc}") from None
