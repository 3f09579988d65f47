import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from loradiv.linkbudget import BracketError, PathLossModel, range_factor, snr_at_ber, snr_gap_at_ber
from loradiv.theory import theory_curve


def test_model_defaults_and_validation():
    m = PathLossModel()
    assert (m.reference_loss_db, m.exponent, m.reference_distance_km) == (91.22, 2.0, 1.0)
    assert m.loss_db(1.0) == pytest.approx(91.22)
    assert m.loss_db(10.0) == pytest.approx(111.22)
    assert m.distance_km(111.22) == pytest.approx(10.0)
    with pytest.raises(ValueError):
        PathLossModel(exponent=0)
    with pytest.raises(ValueError):
        PathLossModel(reference_distance_km=-1)


def test_range_factor_values():
    assert range_factor(0.0) == 1.0
    assert range_factor(8.0) == pytest.approx(10 ** 0.4)
    assert range_factor(8.0) == pytest.approx(2.51, abs=0.01)
    assert 25 <= range_factor(29.0) <= 29
    assert range_factor(29.0) == pytest.approx(28.18, abs=0.01)
    assert range_factor(20.0, PathLossModel(exponent=4.0)) == pytest.approx(math.sqrt(10))
    with pytest.raises(ValueError):
        range_factor(math.inf)


def test_range_factor_consistent_with_loss_model():
    m = PathLossModel(exponent=3.1, reference_distance_km=0.5)
    d = 7.3
    assert m.distance_km(m.loss_db(d) + 12.0) == pytest.approx(d * range_factor(12.0, m))


@given(a=st.floats(-60, 60), b=st.floats(-60, 60), n=st.floats(0.5, 6))
def test_range_factor_multiplicative(a, b, n):
    m = PathLossModel(exponent=n)
    assert range_factor(a + b, m) == pytest.approx(range_factor(a, m) * range_factor(b, m), rel=1e-12)


def test_log_linear_interpolation():
    snr = [0.0, 2.0]
    ber = [1e-2, 1e-4]
    assert snr_at_ber(snr, ber, 1e-3) == pytest.approx(1.0)
    assert snr_at_ber(snr, ber, 1e-2) == pytest.approx(0.0)
    assert snr_at_ber(snr, ber, 1e-4) == pytest.approx(2.0)


def test_zero_ber_points_skipped():
    assert snr_at_ber([0, 1, 2, 3], [1e-2, 1e-3, 1e-5, 0.0], 1e-4) == pytest.approx(1.5)


def test_not_bracketed():
    with pytest.raises(BracketError, match="curve_b"):
        snr_gap_at_ber(([0, 1], [1e-1, 1e-5]), ([0, 1], [1e-1, 1e-2]), 1e-4)


def test_identical_curves_zero_gap():
    c = ([0.0, 1.0, 2.0], [1e-2, 1e-3, 1e-5])
    assert snr_gap_at_ber(c, c, 1e-4) == 0.0


@given(shift=st.floats(-20, 20), target=st.sampled_from([1e-2, 1e-3, 1e-4]))
def test_gap_antisymmetric_and_recovers_shift(shift, target):
    snr = np.arange(-10.0, 10.1, 0.5)
    ber = 10.0 ** (-0.3 * (snr + 10.0) - 0.5)
    a = (snr, ber)
    b = (snr + shift, ber)
    g = snr_gap_at_ber(a, b, target)
    assert g == pytest.approx(-shift, abs=1e-9)
    assert snr_gap_at_ber(b, a, target) == pytest.approx(-g, abs=1e-12)


def test_accepts_theory_points_and_curve_objects():
    pts = theory_curve("coh-awgn", 128, 1, np.arange(-20.0, -5.0, 1.0))
    assert snr_gap_at_ber(pts, pts, 1e-3) == 0.0


@pytest.mark.parametrize("detector", ["coh-awgn", "noncoh-rayleigh"])
def test_grid_refinement_changes_gap_little(detector):
    lo, hi = (-30.0, -10.0) if detector == "coh-awgn" else (-20.0, 20.0)
    coarse = [theory_curve(detector, 1024, L, np.arange(lo, hi + 1e-9, 0.5)) for L in (1, 4)]
    fine = [theory_curve(detector, 1024, L, np.arange(lo, hi + 1e-9, 0.25)) for L in (1, 4)]
    g1 = snr_gap_at_ber(*coarse, 1e-4)
    g2 = snr_gap_at_ber(*fine, 1e-4)
    assert abs(g1 - g2) < 0.1
