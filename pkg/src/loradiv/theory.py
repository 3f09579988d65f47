"""Analytical symbol and bit error probabilities.

Two cases have exact integral forms:

* coherent MRC detection in AWGN, which is M-ary orthogonal coherent
  detection with the symbol energy multiplied by L;
* non-coherent square-law combining over L i.i.d. Rayleigh branches.

Both integrands are written as density * (1 - CDF^(M-1)) with the power taken
in the log domain, so the result is computed directly rather than as
``1 - P(correct)``.  That keeps full relative accuracy deep into the tail
where ``1 - P(correct)`` would cancel to zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from scipy import integrate, special

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class TheoryDetector(str, Enum):
    COHERENT_AWGN = "coh-awgn"
    NONCOHERENT_RAYLEIGH = "noncoh-rayleigh"


@dataclass(frozen=True)
class TheoryPoint:
    detector: TheoryDetector
    M: int
    L: int
    snr_db: float
    ser: float
    ber: float


def _integrate_pieces(f, edges, rtol):
    total = err = 0.0
    with warnings.catch_warnings():
        # quad complains about relative accuracy on pieces that are ~1e-150;
        # the summed error estimate is checked below instead
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(edges[:-1], edges[1:]):
            v, e = integrate.quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=200)
            total += v
            err += e
    if total >= 1e-12 and err > 1e-6 * total:
        warnings.warn(
            f"quadrature error estimate {err:.2e} exceeds 1e-6 of result {total:.3e}",
            RuntimeWarning,
            stacklevel=3,
        )
    return total, err


def _check(M: int, L: int) -> None:
    if M < 2 or M & (M - 1):
        raise ValueError(f"M must be a power of two >= 2, got {M}")
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")


def es_over_n0(snr_db: float, M: int) -> float:
    """Per-antenna SNR (dB) to symbol energy over N0: M * 10^(snr/10)."""
    if snr_db == math.inf:
        return math.inf
    return M * 10.0 ** (snr_db / 10.0)



def ser_coherent_awgn(
    M: int, L: int, es_over_n0: float, *, rtol: float = 1e-10, full_output: bool = False
):
    """SER of coherent detection with L-branch MRC in AWGN.

    Evaluates

        P_s = int phi(y - mu) * (1 - Phi(y)^(M-1)) dy,   mu = sqrt(2 L Es/N0)

    by adaptive quadrature.  With ``full_output`` returns ``(ser, abserr)``.
    """
    _check(M, L)
    if es_over_n0 < 0:
        raise ValueError(f"Es/N0 must be >= 0, got {es_over_n0}")
    if es_over_n0 == math.inf:
        return (0.0, 0.0) if full_output else 0.0
    mu = math.sqrt(2.0 * L * es_over_n0)

    def integrand(y):
        miss = -math.expm1((M - 1) * special.log_ndtr(y))
        return miss * math.exp(-0.5 * (y - mu) ** 2) / _SQRT_2PI

    # where Phi^(M-1) = 1/2, and where the Gaussian-tail product peaks
    knee = float(special.ndtri(2.0 ** (-1.0 / (M - 1))))
    marks = sorted({mu, 0.5 * mu, knee})
    lo = min(marks) - 40.0
    hi = min(mu, max(knee, 0.5 * mu)) + 40.0
    edges = [lo] + [p for p in marks if lo < p < hi] + [hi]
    total, err = _integrate_pieces(integrand, edges, rtol)
    total = min(max(total, 0.0), (M - 1) / M)
    return (total, err) if full_output else total


def noncoherent_truncation(M: int, L: int, gamma_c: float) -> float:
    """Upper integration limit.

    lambda_max = (1 + gamma_c)(L + 40 + 10 sqrt(L)) bounds the Gamma density;
    past the point where the miss factor falls below 1e-30 the integrand is
    negligible too, so the smaller of the two is used.
    """
    lam_max = (1.0 + gamma_c) * (L + 40.0 + 10.0 * math.sqrt(L))
    return min(lam_max, _miss_fade_point(M, L))


def _miss_fade_point(M: int, L: int) -> float:
    # (M-1) Q(L, lam) = 1e-30, an upper bound on the miss factor beyond it
    return float(special.gammainccinv(L, 1e-30 / (M - 1)))


def noncoherent_tail_bound(M: int, L: int, gamma_c: float) -> float:
    """Upper bound on the integral beyond ``noncoherent_truncation``.

    The miss factor is decreasing and at most (M-1) Q(L, lam), and the Gamma
    density integrates to one, so the tail is below
    max(Gamma survival at the limit, miss factor at the limit).
    """
    lam = noncoherent_truncation(M, L, gamma_c)
    density_tail = float(special.gammaincc(L, lam / (1.0 + gamma_c)))
    miss_tail = min(1.0, (M - 1) * float(special.gammaincc(L, lam)))
    return min(density_tail, miss_tail)


def _log_gamma_cdf(L: int, lam: float) -> float:
    p = special.gammainc(L, lam)
    if p < 0.5:
        return math.log(p) if p > 0 else -math.inf
    return math.log1p(-special.gammaincc(L, lam))


def ser_noncoherent_rayleigh(
    M: int, L: int, gamma_c: float, *, rtol: float = 1e-10, full_output: bool = False
):
    """SER of non-coherent square-law combining over L Rayleigh branches.

    Evaluates

        P_s = int_0^inf g(lam) * (1 - [1 - e^-lam sum_{q<L} lam^q/q!]^(M-1)) dlam

    with g the Gamma(L, 1 + gamma_c) density, over [0, lambda_max].  The
    bracket is the regularized lower incomplete gamma P(L, lam); its
    (M-1)-th power and the (L-1)! normalization are taken in log space.
    """
    _check(M, L)
    if gamma_c < 0:
        raise ValueError(f"gamma_c must be >= 0, got {gamma_c}")
    if gamma_c == math.inf:
        return (0.0, 0.0) if full_output else 0.0
    scale = 1.0 + gamma_c
    log_norm = special.gammaln(L) + L * math.log(scale)

    def integrand(lam):
        if lam <= 0.0:
            return math.exp(-log_norm) if L == 1 else 0.0
        miss = -math.expm1((M - 1) * _log_gamma_cdf(L, lam))
        return miss * math.exp((L - 1) * math.log(lam) - lam / scale - log_norm)

    lam_max = noncoherent_truncation(M, L, gamma_c)
    # P(L, lam)^(M-1) = 1/2 at the knee; density mode and bulk follow
    knee = float(special.gammaincinv(L, 2.0 ** (-1.0 / (M - 1))))
    marks = [knee, scale * (L - 1), scale * (L + 10.0 * math.sqrt(L))]
    edges = [0.0] + sorted(p for p in set(marks) if 0.0 < p < lam_max) + [lam_max]
    total, err = _integrate_pieces(integrand, edges, rtol)
    total = min(max(total, 0.0), (M - 1) / M)
    return (total, err) if full_output else total


def ber_from_ser(ser: float, M: int) -> float:
    """Orthogonal-signaling conversion P_b = P_s * M / (2(M - 1)), clamped to [0, 1]."""
    return min(max(ser * M / (2.0 * (M - 1)), 0.0), 1.0)


def ser_theory(detector: TheoryDetector | str, M: int, L: int, snr_db: float) -> float:
    detector = TheoryDetector(detector)
    x = es_over_n0(snr_db, M)
    if detector is TheoryDetector.COHERENT_AWGN:
        return ser_coherent_awgn(M, L, x)
    return ser_noncoherent_rayleigh(M, L, x)


def theory_curve(
    detector: TheoryDetector | str, M: int, L: int, snr_grid: Iterable[float]
) -> list[TheoryPoint]:
    detector = TheoryDetector(detector)
    grid = [float(s) for s in snr_grid]
    if not grid:
        raise ValueError("empty SNR grid")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("SNR grid must be sorted ascending")
    points = []
    for snr in grid:
        ser = ser_theory(detector, M, L, snr)
        points.append(TheoryPoint(detector, M, L, snr, ser, ber_from_ser(ser, M)))
    return points
