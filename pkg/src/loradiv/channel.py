"""AWGN and block Rayleigh fading per-antenna channels.

SNR is the per-antenna average received SNR A^2/sigma^2 in the sampled
bandwidth.  ``NOISELESS`` (snr_db = +inf) is the exact zero-noise sentinel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .chirp import ChirpWaveform, DimensionError, ModulationParams

NOISELESS = math.inf


class ChannelModel(str, Enum):
    AWGN = "awgn"
    RAYLEIGH = "rayleigh"


@dataclass(frozen=True)
class SnrSpec:
    snr_db: float
    params: ModulationParams

    def __post_init__(self):
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError(f"snr_db must be finite or +inf, got {self.snr_db}")

    @property
    def noiseless(self) -> bool:
        return self.snr_db == math.inf

    @property
    def snr_linear(self) -> float:
        return math.inf if self.noiseless else 10.0 ** (self.snr_db / 10.0)

    @property
    def noise_variance(self) -> float:
        return 0.0 if self.noiseless else self.params.amplitude**2 / self.snr_linear

    @property
    def es_over_n0(self) -> float:
        return self.params.M * self.snr_linear


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    coefficients: np.ndarray
    model: ChannelModel

    @property
    def num_antennas(self) -> int:
        return self.coefficients.shape[0]


@dataclass(frozen=True, eq=False)
class ReceivedSymbol:
    per_antenna: np.ndarray  # L x M
    truth: int


def _as_shape(shape) -> tuple:
    return (int(shape),) if np.isscalar(shape) else tuple(int(s) for s in shape)


def complex_normal(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric CN(0, variance) draws, two real N(0, variance/2) parts each."""
    parts = rng.standard_normal(_as_shape(shape) + (2,))
    return parts.view(np.complex128)[..., 0] * math.sqrt(variance / 2.0)


def draw_coefficients(model: ChannelModel | str, shape, rng: np.random.Generator) -> np.ndarray:
    model = ChannelModel(model)
    if model is ChannelModel.AWGN:
        return np.ones(_as_shape(shape), dtype=np.complex128)
    return complex_normal(rng, shape)


def sample_channel(model: ChannelModel | str, L: int, rng: np.random.Generator) -> ChannelRealization:
    if L < 1:
        raise ValueError(f"need at least one antenna, got L={L}")
    model = ChannelModel(model)
    return ChannelRealization(draw_coefficients(model, (L,), rng), model)


def propagate(
    waveform: ChirpWaveform,
    channel: ChannelRealization,
    snr: SnrSpec,
    rng: np.random.Generator,
    truth: int = -1,
) -> ReceivedSymbol:
    """y_l[n] = h_l x[n] + w_l[n] with w_l[n] ~ CN(0, sigma^2) i.i.d."""
    if snr.params.M != waveform.params.M:
        raise DimensionError(
            f"SNR bookkeeping for M={snr.params.M} but waveform has M={waveform.params.M}"
        )
    h = channel.coefficients
    y = h[:, None] * waveform.samples[None, :]
    if not snr.noiseless:
        y = y + complex_normal(rng, y.shape, snr.noise_variance)
    return ReceivedSymbol(y, truth)
