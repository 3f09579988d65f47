"""SNR savings to coverage extension under a log-distance path-loss model."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class BracketError(ValueError):
    """A curve never crosses the requested BER."""


@dataclass(frozen=True)
class PathLossModel:
    """PL(d) = reference_loss_db + 10 n log10(d / d0), d in km."""

    reference_loss_db: float = 91.22
    exponent: float = 2.0
    reference_distance_km: float = 1.0

    def __post_init__(self):
        if not self.exponent > 0:
            raise ValueError(f"path-loss exponent must be positive, got {self.exponent}")
        if not self.reference_distance_km > 0:
            raise ValueError(f"d0 must be positive, got {self.reference_distance_km}")

    def loss_db(self, distance_km):
        return self.reference_loss_db + 10.0 * self.exponent * np.log10(
            np.asarray(distance_km) / self.reference_distance_km
        )

    def distance_km(self, loss_db):
        return self.reference_distance_km * 10.0 ** (
            (np.asarray(loss_db) - self.reference_loss_db) / (10.0 * self.exponent)
        )


def range_factor(snr_gain_db: float, model: PathLossModel = PathLossModel()) -> float:
    """Distance multiplier bought by ``snr_gain_db`` at fixed transmit power."""
    if not math.isfinite(snr_gain_db):
        raise ValueError(f"SNR gain must be finite, got {snr_gain_db}")
    return 10.0 ** (snr_gain_db / (10.0 * model.exponent))


def snr_at_ber(snr_db, ber, target_ber: float, name: str = "curve") -> float:
    """SNR where a decreasing BER curve crosses ``target_ber``.

    Interpolates linearly in (SNR dB, log10 BER) between the first pair of
    consecutive points that brackets the target.  Zero-BER points are
    skipped since they have no log.
    """
    snr = np.asarray(snr_db, dtype=float)
    ber = np.asarray(ber, dtype=float)
    if snr.shape != ber.shape or snr.ndim != 1:
        raise ValueError(f"{name}: SNR and BER arrays must be 1-D and the same length")
    if not 0 < target_ber < 1:
        raise ValueError(f"target BER must be in (0, 1), got {target_ber}")
    keep = ber > 0
    snr, ber = snr[keep], ber[keep]
    order = np.argsort(snr, kind="stable")
    snr, log_ber = snr[order], np.log10(ber[order])
    target = math.log10(target_ber)
    for i in range(len(snr) - 1):
        a, b = log_ber[i], log_ber[i + 1]
        if a == target:
            return float(snr[i])
        if (a - target) * (b - target) < 0:
            return float(snr[i] + (target - a) * (snr[i + 1] - snr[i]) / (b - a))
    if len(snr) and log_ber[-1] == target:
        return float(snr[-1])
    raise BracketError(f"{name} does not cross BER {target_ber:g} within its SNR range")


def snr_gap_at_ber(curve_a, curve_b, target_ber: float) -> float:
    """SNR(curve_a) - SNR(curve_b) at ``target_ber``, in dB.

    Each curve is anything with ``snr_db`` and ``ber`` sequences, or a
    ``(snr_db, ber)`` pair.  Positive means curve_b needs less SNR.
    """
    sa = snr_at_ber(*_xy(curve_a), target_ber, name="curve_a")
    sb = snr_at_ber(*_xy(curve_b), target_ber, name="curve_b")
    return sa - sb


def _xy(curve):
    if hasattr(curve, "snr_db") and hasattr(curve, "ber"):
        return curve.snr_db, curve.ber
    if isinstance(curve, (list, tuple)) and curve and hasattr(curve[0], "ber"):
        return [p.snr_db for p in curve], [p.ber for p in curve]
    if isinstance(curve, (list, tuple)) and len(curve) == 2:
        return curve
    raise TypeError(f"cannot read SNR/BER from {type(curve).__name__}")
