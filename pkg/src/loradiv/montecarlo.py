"""Monte Carlo BER/SER estimation: modulate -> channel -> demodulate -> detect -> score.

Work is split into chunks of whole coherence frames.  Chunk ``c`` at SNR
``s`` draws from its own stream, ``SeedSequence(seed, spawn_key=(key(s), c))``,
so results depend only on (config, seed, SNR) and never on the number of
workers or the order in which chunks finish.  Chunks are folded in index
order and the stopping rule is checked after each one.

Random draws are independent of the detector, so several detectors can be
scored on the same received samples (``run_point_detectors``); each still
applies its own stopping rule and gets exactly the result a single-detector
run would produce.
"""

from __future__ import annotations

import logging
import math
import struct
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import binomtest

from .channel import NOISELESS, ChannelModel, complex_normal, draw_coefficients
from .chirp import ModulationParams, demodulate, modulate_many
from .detectors import coherent_decisions, noncoherent_decisions, semicoherent_decisions
from .theory import TheoryDetector, ber_from_ser, ser_theory

log = logging.getLogger(__name__)


class Detector(str, Enum):
    COHERENT = "coherent"
    NONCOHERENT = "noncoherent"
    SEMICOHERENT = "semicoherent"

    @classmethod
    def parse(cls, name: str) -> "Detector":
        aliases = {"coh": cls.COHERENT, "noncoh": cls.NONCOHERENT, "semicoh": cls.SEMICOHERENT}
        return aliases.get(name) or cls(name)


class BitMapping(str, Enum):
    BINARY = "binary"
    GRAY = "gray"


@dataclass(frozen=True)
class SimConfig:
    spreading_factor: int = 7
    num_antennas: int = 1
    detector: Detector = Detector.NONCOHERENT
    channel: ChannelModel = ChannelModel.RAYLEIGH
    snr_db: tuple[float, ...] = ()
    trials: int = 100_000
    target_errors: int = 100
    max_symbols: int = 10_000_000
    tau_c: int = 10
    n_max: int = 50
    seed: int = 0
    bit_mapping: BitMapping = BitMapping.BINARY
    amplitude: float = 1.0
    # complex samples per work chunk; sets the chunk size in frames
    chunk_samples: int = 1 << 21
    test_mode: bool = False

    def __post_init__(self):
        object.__setattr__(self, "detector", Detector.parse(self.detector) if isinstance(self.detector, str) else self.detector)
        object.__setattr__(self, "channel", ChannelModel(self.channel))
        object.__setattr__(self, "bit_mapping", BitMapping(self.bit_mapping))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        self.params  # validates SF and amplitude
        if self.num_antennas < 1:
            raise ValueError(f"num_antennas must be >= 1, got {self.num_antennas}")
        if self.tau_c < 1 or self.n_max < 1:
            raise ValueError("tau_c and n_max must be >= 1")
        if self.trials < self.tau_c:
            raise ValueError(f"trials ({self.trials}) must be at least tau_c ({self.tau_c})")
        if self.max_symbols < self.trials:
            raise ValueError("max_symbols must be >= trials")
        if self.target_errors < 0:
            raise ValueError("target_errors must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if any(math.isnan(s) or s == -math.inf for s in self.snr_db):
            raise ValueError("SNR values must be finite or +inf")

    @property
    def params(self) -> ModulationParams:
        return ModulationParams(self.spreading_factor, self.amplitude, test_mode=self.test_mode)

    @property
    def frames_per_chunk(self) -> int:
        per_frame = self.tau_c * self.num_antennas * self.params.M
        return max(1, self.chunk_samples // per_frame)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("detector", "channel", "bit_mapping"):
            d[k] = d[k].value
        d["snr_db"] = [_json_float(s) for s in self.snr_db]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        d["snr_db"] = tuple(float(s) for s in d.get("snr_db", ()))
        return cls(**d)


def _json_float(x: float):
    return "inf" if x == math.inf else x


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    symbols_tested: int
    symbol_errors: int
    bit_errors: int
    ser: float
    ber: float
    ci95_low: float
    ci95_high: float
    theory_ber: float | None = None
    mean_iters: float = 0.0
    spreading_factor: int = 7

    @property
    def ber_from_ser(self) -> float:
        """BER implied by the measured SER under the uniform-error conversion."""
        return ber_from_ser(self.ser, 1 << self.spreading_factor)

    @property
    def ber_stderr(self) -> float:
        """Standard error of ``ber`` given the measured SER (see ``ber_standard_error``)."""
        return ber_standard_error(self.ser, self.spreading_factor, self.symbols_tested)

    @property
    def ser_stderr(self) -> float:
        n = self.symbols_tested
        return math.sqrt(self.ser * (1 - self.ser) / n) if n else math.nan


@dataclass
class BerCurve:
    config: SimConfig
    points: list[BerPoint] = field(default_factory=list)

    @property
    def snr_db(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    @property
    def ber(self) -> np.ndarray:
        return np.array([p.ber for p in self.points])

    @property
    def ser(self) -> np.ndarray:
        return np.array([p.ser for p in self.points])


@dataclass
class _Counts:
    symbols: int = 0
    symbol_errors: int = 0
    bit_errors: int = 0
    frames: int = 0
    iterations: int = 0

    def __iadd__(self, other: "_Counts") -> "_Counts":
        self.symbols += other.symbols
        self.symbol_errors += other.symbol_errors
        self.bit_errors += other.bit_errors
        self.frames += other.frames
        self.iterations += other.iterations
        return self


def ber_standard_error(ser: float, spreading_factor: int, symbols: int) -> float:
    """Standard error of a BER estimate from ``symbols`` independent symbols.

    Bit errors come in bursts: a wrong symbol flips B bits, where B is the
    Hamming weight of an error word that is uniform over the M - 1 nonzero
    labels (for both natural and Gray labelling).  Per symbol the bit-error
    count has mean p E[B] and second moment p E[B^2], with
    E[B] = SF 2^(SF-1) / (M-1) and E[B^2] = SF (SF+1) 2^(SF-2) / (M-1).
    A binomial on bits would understate the spread when SER is small; a
    binomial on symbols alone would miss the spread of B when SER is near 1.
    """
    if symbols <= 0:
        return math.nan
    sf = spreading_factor
    M = 1 << sf
    mean_b = sf * 2 ** (sf - 1) / (M - 1)
    mean_b2 = sf * (sf + 1) * 2 ** (sf - 2) / (M - 1)
    var = ser * mean_b2 - (ser * mean_b) ** 2
    return math.sqrt(max(var, 0.0) / symbols) / sf


def snr_stream_key(snr_db: float) -> int:
    """Stable integer identity of an SNR value, used in the seed spawn key."""
    return int.from_bytes(struct.pack("<d", float(snr_db)), "little")


def chunk_rng(seed: int, snr_db: float, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(snr_stream_key(snr_db), chunk))
    return np.random.Generator(np.random.PCG64(ss))


def bit_labels(symbols: np.ndarray, mapping: BitMapping = BitMapping.BINARY) -> np.ndarray:
    symbols = np.asarray(symbols, dtype=np.int64)
    if BitMapping(mapping) is BitMapping.GRAY:
        return symbols ^ (symbols >> 1)
    return symbols


def count_bit_errors(truth: np.ndarray, decided: np.ndarray, mapping: BitMapping = BitMapping.BINARY) -> int:
    diff = bit_labels(truth, mapping) ^ bit_labels(decided, mapping)
    return int(np.bitwise_count(diff).sum())


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ci = binomtest(errors, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


def simulate_chunk(
    cfg: SimConfig, snr_db: float, chunk: int, detectors: Sequence[Detector]
) -> dict[Detector, _Counts]:
    """One work unit: ``cfg.frames_per_chunk`` coherence frames through every detector."""
    params = cfg.params
    M, L, tau = params.M, cfg.num_antennas, cfg.tau_c
    n_frames = cfg.frames_per_chunk
    rng = chunk_rng(cfg.seed, snr_db, chunk)

    symbols = rng.integers(0, M, size=(n_frames, tau))
    h = draw_coefficients(cfg.channel, (n_frames, L), rng)
    y = h[:, None, :, None] * modulate_many(symbols, params)[:, :, None, :]
    if snr_db != NOISELESS:
        sigma2 = params.amplitude**2 / 10.0 ** (snr_db / 10.0)
        y += complex_normal(rng, y.shape, sigma2)
    bins = demodulate(y, params)

    out = {}
    for det in detectors:
        iterations = 0
        if det is Detector.COHERENT:
            decided = coherent_decisions(bins, h[:, None, :])
        elif det is Detector.NONCOHERENT:
            decided = noncoherent_decisions(bins)
        else:
            decided, iters = semicoherent_decisions(bins, cfg.n_max, params.amplitude)
            iterations = int(iters.sum())
        out[det] = _Counts(
            symbols=symbols.size,
            symbol_errors=int(np.count_nonzero(decided != symbols)),
            bit_errors=count_bit_errors(symbols, decided, cfg.bit_mapping),
            frames=n_frames,
            iterations=iterations,
        )
    return out


def _done(cfg: SimConfig, snr_db: float, c: _Counts) -> bool:
    if c.symbols >= cfg.max_symbols:
        return True
    if c.symbols < cfg.trials:
        return False
    # without noise no error can ever occur; the error target is moot
    return snr_db == NOISELESS or c.bit_errors >= cfg.target_errors


def theory_ber_for(cfg: SimConfig, snr_db: float) -> float | None:
    """Analytical BER where one exists for the configured detector/channel, else None."""
    kind = {
        (Detector.COHERENT, ChannelModel.AWGN): TheoryDetector.COHERENT_AWGN,
        (Detector.NONCOHERENT, ChannelModel.RAYLEIGH): TheoryDetector.NONCOHERENT_RAYLEIGH,
    }.get((cfg.detector, cfg.channel))
    if kind is None:
        return None
    M = cfg.params.M
    return ber_from_ser(ser_theory(kind, M, cfg.num_antennas, snr_db), M)


def _point(cfg: SimConfig, snr_db: float, c: _Counts, with_theory: bool) -> BerPoint:
    sf = cfg.spreading_factor
    bits = c.symbols * sf
    lo, hi = wilson_interval(c.bit_errors, bits)
    return BerPoint(
        snr_db=snr_db,
        symbols_tested=c.symbols,
        symbol_errors=c.symbol_errors,
        bit_errors=c.bit_errors,
        ser=c.symbol_errors / c.symbols,
        ber=c.bit_errors / bits,
        ci95_low=lo,
        ci95_high=hi,
        theory_ber=theory_ber_for(cfg, snr_db) if with_theory else None,
        mean_iters=c.iterations / c.frames if c.frames else 0.0,
        spreading_factor=sf,
    )


def run_point_detectors(
    cfg: SimConfig,
    snr_db: float,
    detectors: Iterable[Detector | str],
    *,
    jobs: int = 1,
    executor: Executor | None = None,
    with_theory: bool = False,
) -> dict[Detector, BerPoint]:
    """Score several detectors on common random samples at one SNR."""
    dets = [Detector.parse(d) if isinstance(d, str) else d for d in detectors]
    totals = {d: _Counts() for d in dets}
    pending = list(dets)
    own_pool = None
    if executor is None and jobs > 1:
        executor = own_pool = ProcessPoolExecutor(max_workers=jobs)
    try:
        chunk = 0
        while pending:
            wave = max(1, jobs)
            if executor is None:
                results = [simulate_chunk(cfg, snr_db, chunk, pending)]
            else:
                futs = [
                    executor.submit(simulate_chunk, cfg, snr_db, chunk + i, tuple(pending))
                    for i in range(wave)
                ]
                results = [f.result() for f in futs]
            # fold strictly in chunk order; work past a detector's stop is discarded
            for res in results:
                for d in list(pending):
                    totals[d] += res[d]
                    if _done(cfg, snr_db, totals[d]):
                        pending.remove(d)
                chunk += 1
                if not pending:
                    break
    finally:
        if own_pool is not None:
            own_pool.shutdown()
    return {d: _point(replace(cfg, detector=d), snr_db, totals[d], with_theory) for d in dets}


def run_point(
    cfg: SimConfig,
    snr_db: float,
    *,
    jobs: int = 1,
    executor: Executor | None = None,
    with_theory: bool = False,
) -> BerPoint:
    res = run_point_detectors(
        cfg, snr_db, [cfg.detector], jobs=jobs, executor=executor, with_theory=with_theory
    )
    return res[cfg.detector]


def run_sweep(cfg: SimConfig, *, jobs: int = 1, with_theory: bool = False) -> BerCurve:
    if not cfg.snr_db:
        raise ValueError("empty SNR grid")
    if with_theory and theory_ber_for(cfg, 0.0) is None:
        log.warning(
            "no analytical BER for %s detection over %s; theory column left empty",
            cfg.detector.value,
            cfg.channel.value,
        )
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        points = []
        for snr in cfg.snr_db:
            p = run_point(cfg, snr, jobs=jobs, executor=pool, with_theory=with_theory)
            log.info("snr %.2f dB: %d symbols, ber %.3e", snr, p.symbols_tested, p.ber)
            points.append(p)
    finally:
        if pool is not None:
            pool.shutdown()
    return BerCurve(cfg, points)


def run_sweep_detectors(
    cfg: SimConfig, detectors: Iterable[Detector | str], *, jobs: int = 1, with_theory: bool = False
) -> dict[Detector, BerCurve]:
    """Sweep several detectors over common random samples."""
    dets = [Detector.parse(d) if isinstance(d, str) else d for d in detectors]
    curves = {d: BerCurve(replace(cfg, detector=d)) for d in dets}
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for snr in cfg.snr_db:
            res = run_point_detectors(cfg, snr, dets, jobs=jobs, executor=pool, with_theory=with_theory)
            for d in dets:
                curves[d].points.append(res[d])
    finally:
        if pool is not None:
            pool.shutdown()
    return curves
