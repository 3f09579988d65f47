"""LoRa chirp synthesis and the dechirp + FFT demodulation front end.

All quantities are in units of samples (T_s = 1/B is implicit).  The array
helpers at the bottom operate on stacks of symbols with the sample axis last
and are what the simulator uses; the object-level functions wrap them for
single-symbol work.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

PRODUCTION_SF = range(7, 13)


class SymbolRangeError(ValueError):
    """Symbol index outside 0..M-1."""


class DimensionError(ValueError):
    """Array shapes inconsistent with the modulation parameters."""


@dataclass(frozen=True)
class ModulationParams:
    """Spreading factor and chirp amplitude.

    SF 7..12 are the LoRa values.  ``test_mode=True`` relaxes the range to
    any SF >= 2 so small alphabets can be checked exhaustively.
    """

    spreading_factor: int
    amplitude: float = 1.0
    test_mode: bool = field(default=False, compare=False)

    def __post_init__(self):
        sf = self.spreading_factor
        if not isinstance(sf, (int, np.integer)):
            raise TypeError(f"spreading_factor must be an integer, got {sf!r}")
        if self.test_mode:
            if sf < 2:
                raise ValueError(f"spreading_factor must be >= 2, got {sf}")
        elif sf not in PRODUCTION_SF:
            raise ValueError(f"spreading_factor must be in 7..12, got {sf}")
        if not self.amplitude > 0:
            raise ValueError(f"amplitude must be positive, got {self.amplitude}")

    @property
    def M(self) -> int:
        return 1 << int(self.spreading_factor)

    @property
    def symbol_energy(self) -> float:
        # E_s = A^2 * T_sym with T_sym = M samples
        return self.amplitude**2 * self.M


@dataclass(frozen=True, eq=False)
class ChirpWaveform:
    samples: np.ndarray
    params: ModulationParams

    def __post_init__(self):
        if self.samples.shape != (self.params.M,):
            raise DimensionError(
                f"waveform needs {self.params.M} samples, got shape {self.samples.shape}"
            )


@dataclass(frozen=True, eq=False)
class DemodGrid:
    """Post-FFT bin values, one row per antenna (shape L x M)."""

    bins: np.ndarray
    params: ModulationParams

    def __post_init__(self):
        if self.bins.ndim != 2 or self.bins.shape[1] != self.params.M:
            raise DimensionError(
                f"grid must be L x {self.params.M}, got shape {self.bins.shape}"
            )

    @property
    def num_antennas(self) -> int:
        return self.bins.shape[0]


def _check_symbol(m: int, M: int) -> int:
    if not 0 <= m < M:
        raise SymbolRangeError(f"symbol {m} outside 0..{M - 1}")
    return int(m)


@lru_cache(maxsize=32)
def _unit_chirp(M: int) -> np.ndarray:
    n = np.arange(M, dtype=np.float64)
    # phase cycles reduced before exp keeps the chirp accurate for large M
    cycles = np.mod(n * n / (2 * M) - n / 2, 1.0)
    chirp = np.exp(2j * np.pi * cycles)
    chirp.setflags(write=False)
    return chirp


@lru_cache(maxsize=32)
def _phase_table(M: int) -> np.ndarray:
    k = np.arange(M, dtype=np.float64)
    table = np.exp(-2j * np.pi * np.mod(k * k / (2 * M) - k / 2, 1.0))
    table.setflags(write=False)
    return table


def make_base_chirp(params: ModulationParams) -> ChirpWaveform:
    """The up-chirp x_0[n] = A exp(j2pi(n^2/2M - n/2)), n = 0..M-1."""
    return ChirpWaveform(params.amplitude * _unit_chirp(params.M), params)


def modulate(m: int, params: ModulationParams) -> ChirpWaveform:
    """Cyclic shift of the base chirp: x_m[n] = x_0[(n + m) mod M]."""
    m = _check_symbol(m, params.M)
    return ChirpWaveform(params.amplitude * np.roll(_unit_chirp(params.M), -m), params)


def symbol_phase(m: int, params: ModulationParams) -> float:
    """Constant phase 2pi(m^2/2M - m/2) carried by symbol m after dechirping."""
    m = _check_symbol(m, params.M)
    M = params.M
    return 2 * np.pi * (m * m / (2 * M) - m / 2)


def dechirp(received, params: ModulationParams) -> np.ndarray:
    """Multiply by x_0*[n]/A; a clean symbol m becomes A e^{j Psi_m} e^{j2pi mn/M}."""
    received = np.asarray(received)
    if received.shape[-1:] != (params.M,):
        raise DimensionError(
            f"expected trailing length {params.M}, got shape {received.shape}"
        )
    # x_0*[n] / A is the unit-amplitude conjugate chirp
    return received * _unit_chirp(params.M).conj()


def demod_fft(dechirped, params: ModulationParams) -> DemodGrid:
    """Unitary M-point DFT of each antenna's dechirped sequence."""
    z = np.atleast_2d(np.asarray(dechirped))
    if z.ndim != 2 or z.shape[1] != params.M:
        raise DimensionError(f"expected L x {params.M} input, got shape {z.shape}")
    return DemodGrid(np.fft.fft(z, axis=-1, norm="ortho"), params)


# -- batched helpers -------------------------------------------------------


def modulate_many(symbols: np.ndarray, params: ModulationParams) -> np.ndarray:
    """Waveforms for an integer array of symbols; output shape symbols.shape + (M,)."""
    M = params.M
    symbols = np.asarray(symbols)
    if symbols.size and (symbols.min() < 0 or symbols.max() >= M):
        raise SymbolRangeError(f"symbols outside 0..{M - 1}")
    idx = (np.arange(M) + symbols[..., None]) % M
    return params.amplitude * _unit_chirp(M)[idx]


def demodulate(received: np.ndarray, params: ModulationParams) -> np.ndarray:
    """Dechirp then unitary FFT along the last axis, for any leading shape."""
    return np.fft.fft(dechirp(received, params), axis=-1, norm="ortho")


def phase_rotations(M: int) -> np.ndarray:
    """exp(-j Psi_k) for k = 0..M-1 (read-only, cached)."""
    return _phase_table(M)
