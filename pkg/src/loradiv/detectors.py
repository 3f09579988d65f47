"""Coherent (MRC), non-coherent (square-law) and iterative semi-coherent detectors.

The ``*_decisions`` functions work on stacked post-FFT grids with shape
``(..., L, M)`` and are what the Monte Carlo driver calls.  The object-level
functions (``detect_coherent`` and friends) accept a single ``DemodGrid``.

Every argmax breaks ties toward the lowest bin index (numpy's ``argmax``
returns the first maximum).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelRealization
from .chirp import DemodGrid, DimensionError, ModulationParams, phase_rotations, _check_symbol


@dataclass(frozen=True)
class DetectionResult:
    symbol: int
    decision_metric: float
    iterations_used: int = 0


@dataclass(frozen=True, eq=False)
class ChannelEstimate:
    per_antenna: np.ndarray


@dataclass(frozen=True)
class SemiCoherentConfig:
    tau_c: int = 10
    n_max: int = 50

    def __post_init__(self):
        if self.tau_c < 1:
            raise ValueError(f"tau_c must be >= 1, got {self.tau_c}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")


# -- array kernels ---------------------------------------------------------


def coherent_metric(bins: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Re{exp(-j Psi_k) * sum_l conj(h_l) V_l[k]} for every bin k.

    ``bins`` has shape (..., L, M) and ``h`` shape (..., L).  Rotating bin k by
    its own Psi_k is the causal form of the known-symbol rotation: for the
    transmitted bin it is exact, elsewhere it only rotates circular noise.
    """
    combined = np.einsum("...l,...lk->...k", h.conj(), bins)
    return (combined * phase_rotations(bins.shape[-1])).real


def noncoherent_metric(bins: np.ndarray) -> np.ndarray:
    return (bins.real**2 + bins.imag**2).sum(axis=-2)


def coherent_decisions(bins: np.ndarray, h: np.ndarray) -> np.ndarray:
    return coherent_metric(bins, h).argmax(axis=-1)


def noncoherent_decisions(bins: np.ndarray) -> np.ndarray:
    return noncoherent_metric(bins).argmax(axis=-1)


def channel_estimates(bins: np.ndarray, symbols: np.ndarray, amplitude: float = 1.0) -> np.ndarray:
    """Least-squares h estimate from the detected bin of each symbol.

    ``bins`` (..., L, M), ``symbols`` (...) -> (..., L).  Normalized so a
    noiseless, correctly detected symbol returns h exactly.
    """
    M = bins.shape[-1]
    picked = np.take_along_axis(bins, symbols[..., None, None], axis=-1)[..., 0]
    scale = phase_rotations(M)[symbols] / (amplitude * np.sqrt(M))
    return picked * scale[..., None]


def semicoherent_decisions(
    bins: np.ndarray, n_max: int = 50, amplitude: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """Iterative semi-coherent detection of whole coherence frames.

    ``bins`` has shape (F, tau, L, M): F independent frames of tau symbols
    each.  Returns ``(decisions (F, tau), iterations (F,))``.
    """
    if bins.ndim != 4:
        raise DimensionError(f"expected (frames, tau, L, M) bins, got shape {bins.shape}")
    n_frames = bins.shape[0]
    initial = noncoherent_decisions(bins)
    decisions = initial.copy()
    h_ave = channel_estimates(bins, decisions, amplitude).mean(axis=1)
    iterations = np.zeros(n_frames, dtype=np.int64)

    # measure-zero case: a zero estimate carries no phase, keep stage-1 decisions
    active = np.flatnonzero(np.any(h_ave != 0, axis=1))
    for _ in range(n_max):
        if active.size == 0:
            break
        frame_bins = bins[active]
        new = coherent_decisions(frame_bins, h_ave[active][:, None, :])
        iterations[active] += 1
        est = channel_estimates(frame_bins, new, amplitude).mean(axis=1)
        changed = np.any(new != decisions[active], axis=1)
        usable = np.any(est != 0, axis=1)

        decisions[active] = new
        h_ave[active] = est
        stuck = active[~usable]
        decisions[stuck] = initial[stuck]
        active = active[changed & usable]
    return decisions, iterations


# -- single-symbol API -----------------------------------------------------


def _result(metric: np.ndarray, iterations: int = 0) -> DetectionResult:
    k = int(metric.argmax())
    return DetectionResult(k, float(metric[k]), iterations)


def detect_coherent(grid: DemodGrid, channel: ChannelRealization) -> DetectionResult:
    h = np.asarray(channel.coefficients)
    if h.shape != (grid.num_antennas,):
        raise DimensionError(
            f"channel has {h.shape} coefficients for a grid with {grid.num_antennas} antennas"
        )
    return _result(coherent_metric(grid.bins, h))


def detect_noncoherent(grid: DemodGrid) -> DetectionResult:
    return _result(noncoherent_metric(grid.bins))


def estimate_channel_single(grid: DemodGrid, m_hat: int, params: ModulationParams | None = None) -> np.ndarray:
    params = params or grid.params
    m_hat = _check_symbol(m_hat, params.M)
    return channel_estimates(grid.bins, np.asarray(m_hat), params.amplitude)


def average_channel(estimates) -> ChannelEstimate:
    est = np.asarray(estimates, dtype=np.complex128)
    if est.ndim == 1:
        est = est[:, None]
    if est.shape[0] == 0:
        raise ValueError("cannot average an empty set of channel estimates")
    return ChannelEstimate(est.mean(axis=0))


def detect_semicoherent_frame(
    grids: Sequence[DemodGrid], cfg: SemiCoherentConfig = SemiCoherentConfig()
) -> list[DetectionResult]:
    """Run the iterative detector over one coherence frame of grids.

    A frame may be shorter than ``cfg.tau_c`` (end of a stream); it is
    processed at its actual length.
    """
    if len(grids) == 0:
        raise ValueError("empty frame")
    shapes = {g.bins.shape for g in grids}
    if len(shapes) != 1:
        raise DimensionError(f"inconsistent grid shapes in frame: {sorted(shapes)}")
    params = grids[0].params
    stacked = np.stack([g.bins for g in grids])[None]
    decisions, iterations = semicoherent_decisions(stacked, cfg.n_max, params.amplitude)

    # recompute winning metrics under the final estimate
    h_ave = channel_estimates(stacked, decisions, params.amplitude).mean(axis=1)
    if np.any(h_ave != 0):
        metric = coherent_metric(stacked[0], h_ave[0][None, :])
    else:
        metric = noncoherent_metric(stacked[0])
    n_iter = int(iterations[0])
    return [
        DetectionResult(int(m), float(metric[i, m]), n_iter)
        for i, m in enumerate(decisions[0])
    ]
