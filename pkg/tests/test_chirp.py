import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loradiv.chirp import (
    DemodGrid,
    DimensionError,
    ModulationParams,
    SymbolRangeError,
    dechirp,
    demod_fft,
    demodulate,
    make_base_chirp,
    modulate,
    modulate_many,
    symbol_phase,
)


def eq1_sample(n, m, M, A=1.0):
    """x_0[n + m] straight from the chirp formula, index not wrapped."""
    k = n + m
    return A * cmath.exp(2j * math.pi * (k * k / (2 * M) - k / 2))


def dft_oracle(z):
    M = len(z)
    return [
        sum(z[n] * cmath.exp(-2j * math.pi * n * k / M) for n in range(M)) / math.sqrt(M)
        for k in range(M)
    ]


def small(sf, A=1.0):
    return ModulationParams(sf, A, test_mode=True)


class TestParams:
    @pytest.mark.parametrize("sf", range(7, 13))
    def test_production_alphabet(self, sf):
        p = ModulationParams(sf)
        assert p.M == 2**sf
        assert p.M in {128, 256, 512, 1024, 2048, 4096}

    @pytest.mark.parametrize("sf", [1, 6, 13])
    def test_rejects_out_of_range_sf(self, sf):
        with pytest.raises(ValueError):
            ModulationParams(sf)

    def test_test_mode_allows_small_m(self):
        assert small(2).M == 4
        with pytest.raises(ValueError):
            ModulationParams(1, test_mode=True)

    @pytest.mark.parametrize("A", [0.0, -1.0])
    def test_rejects_nonpositive_amplitude(self, A):
        with pytest.raises(ValueError):
            ModulationParams(7, A)

    def test_symbol_energy(self):
        p = ModulationParams(7, 2.0)
        assert p.symbol_energy == 4.0 * 128


class TestBaseChirp:
    def test_first_sample_is_amplitude(self):
        x = make_base_chirp(small(2)).samples
        assert x[0] == pytest.approx(1 + 0j, abs=1e-15)

    def test_second_sample_m4(self):
        x = make_base_chirp(small(2)).samples
        assert x[1] == pytest.approx(cmath.exp(-3j * math.pi / 4), abs=1e-12)
        assert x[1] == pytest.approx(-0.7071067811865476 - 0.7071067811865476j, abs=1e-12)

    def test_constant_envelope(self):
        x = make_base_chirp(ModulationParams(7, 2.0)).samples
        np.testing.assert_allclose(np.abs(x), 2.0, atol=1e-12)

    @pytest.mark.parametrize("sf", [2, 3, 7, 12])
    def test_matches_formula(self, sf):
        p = small(sf, 1.5)
        x = make_base_chirp(p).samples
        idx = np.linspace(0, p.M - 1, 40).astype(int)
        expected = [eq1_sample(n, 0, p.M, 1.5) for n in idx]
        np.testing.assert_allclose(x[idx], expected, atol=1e-9)


class TestModulate:
    def test_zero_shift_is_base(self):
        p = ModulationParams(7)
        np.testing.assert_array_equal(modulate(0, p).samples, make_base_chirp(p).samples)

    def test_wraparound(self):
        p = small(2, 3.0)
        x = modulate(p.M - 1, p).samples
        assert x[1] == pytest.approx(3.0, abs=1e-12)

    def test_unwrapped_formula_agrees(self):
        # x_0 has period M, so the unwrapped index must give the same samples
        p = ModulationParams(7)
        for m in (1, 5, 77, 127):
            x = modulate(m, p).samples
            expected = [eq1_sample(n, m, p.M) for n in range(p.M)]
            np.testing.assert_allclose(x, expected, atol=1e-9)

    def test_pair_orthogonal(self):
        p = ModulationParams(7)
        ip = sum(eq1_sample(n, 5, 128) * eq1_sample(n, 9, 128).conjugate() for n in range(128))
        assert abs(ip) < 1e-9
        assert abs(np.vdot(modulate(9, p).samples, modulate(5, p).samples)) < 1e-9

    @pytest.mark.parametrize("m", [-1, 128, 1000])
    def test_range_error(self, m):
        with pytest.raises(SymbolRangeError):
            modulate(m, ModulationParams(7))

    def test_modulate_many_matches_single(self):
        p = ModulationParams(8, 0.7)
        syms = np.array([[0, 3], [255, 100]])
        out = modulate_many(syms, p)
        assert out.shape == (2, 2, 256)
        for i in range(2):
            for j in range(2):
                np.testing.assert_array_equal(out[i, j], modulate(int(syms[i, j]), p).samples)


class TestSymbolPhase:
    def test_zero(self):
        assert symbol_phase(0, ModulationParams(10)) == 0.0

    def test_m2_m4(self):
        assert symbol_phase(2, small(2)) == pytest.approx(-math.pi)

    def test_m1_m128(self):
        assert symbol_phase(1, ModulationParams(7)) == pytest.approx(2 * math.pi * (1 / 256 - 0.5))
        assert symbol_phase(1, ModulationParams(7)) == pytest.approx(-3.117, abs=1e-3)

    def test_range(self):
        with pytest.raises(SymbolRangeError):
            symbol_phase(4, small(2))


class TestDechirpFFT:
    def test_dechirp_symbol_zero_is_constant(self):
        p = ModulationParams(7, 2.0)
        np.testing.assert_allclose(dechirp(modulate(0, p).samples, p), 2.0, atol=1e-12)

    @pytest.mark.parametrize("m", [0, 1, 64, 127])
    def test_dechirp_unit_modulus(self, m):
        p = ModulationParams(7, 1.3)
        np.testing.assert_allclose(np.abs(dechirp(modulate(m, p).samples, p)), 1.3, atol=1e-12)

    def test_dechirp_tone(self):
        p = ModulationParams(7, 1.3)
        m = 11
        n = np.arange(p.M)
        expected = 1.3 * np.exp(1j * symbol_phase(m, p)) * np.exp(2j * np.pi * m * n / p.M)
        np.testing.assert_allclose(dechirp(modulate(m, p).samples, p), expected, atol=1e-9)

    def test_dechirp_length_mismatch(self):
        with pytest.raises(DimensionError):
            dechirp(np.ones(100), ModulationParams(7))

    def test_single_bin_at_symbol(self):
        p = ModulationParams(7)
        z = dechirp(modulate(3, p).samples, p)
        oracle = np.array(dft_oracle(list(z)))
        grid = demod_fft(z, p)
        np.testing.assert_allclose(grid.bins[0], oracle, atol=1e-9)
        assert np.argmax(np.abs(oracle)) == 3
        mask = np.ones(p.M, bool)
        mask[3] = False
        assert np.max(np.abs(oracle[mask])) < 1e-9

    def test_noiseless_magnitude_and_phase(self):
        p = ModulationParams(7)
        for m in (0, 3, 50, 127):
            grid = demod_fft(dechirp(modulate(m, p).samples, p), p)
            assert abs(grid.bins[0, m]) == pytest.approx(math.sqrt(128), abs=1e-9)
            assert math.sqrt(128) == pytest.approx(11.3137, abs=1e-4)
            assert cmath.phase(grid.bins[0, m] * cmath.exp(-1j * symbol_phase(m, p))) == pytest.approx(0, abs=1e-9)
            others = np.delete(grid.bins[0], m)
            assert np.max(np.abs(others)) < 1e-9

    def test_noise_variance_preserved(self):
        p = ModulationParams(7)
        rng = np.random.default_rng(5)
        sigma2 = 2.5
        w = (rng.standard_normal((10_000, p.M)) + 1j * rng.standard_normal((10_000, p.M))) * math.sqrt(sigma2 / 2)
        bins = np.fft.fft(dechirp(w, p), axis=-1, norm="ortho")
        per_bin = np.mean(np.abs(bins) ** 2, axis=0)
        assert np.all(np.abs(per_bin / sigma2 - 1) < 0.05)

    def test_grid_dimensions(self):
        p = ModulationParams(7)
        grid = demod_fft(np.zeros((3, 128), complex), p)
        assert isinstance(grid, DemodGrid)
        assert grid.bins.shape == (3, 128) and grid.num_antennas == 3
        with pytest.raises(DimensionError):
            demod_fft(np.zeros((3, 64)), p)
        with pytest.raises(DimensionError):
            DemodGrid(np.zeros((2, 100)), p)


class TestProperties:
    def test_orthogonality_exhaustive_m128(self):
        p = ModulationParams(7)
        X = modulate_many(np.arange(p.M), p)
        gram = X.conj() @ X.T
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) < 1e-6 * p.M

    def test_orthogonality_exhaustive_m256(self):
        p = ModulationParams(8, 2.0)
        X = modulate_many(np.arange(p.M), p)
        gram = X.conj() @ X.T
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) < 1e-6 * 4.0 * p.M

    @settings(max_examples=50, deadline=None)
    @given(sf=st.integers(9, 12), data=st.data())
    def test_orthogonality_sampled_large_m(self, sf, data):
        p = ModulationParams(sf)
        a = data.draw(st.integers(0, p.M - 1))
        b = data.draw(st.integers(0, p.M - 1).filter(lambda v: v != a))
        assert abs(np.vdot(modulate(a, p).samples, modulate(b, p).samples)) < 1e-6 * p.M

    @pytest.mark.parametrize("sf", [7, 9, 12])
    def test_round_trip_all_symbols(self, sf):
        p = ModulationParams(sf)
        syms = np.arange(p.M)
        bins = demodulate(modulate_many(syms, p), p)
        np.testing.assert_array_equal(np.argmax(np.abs(bins), axis=-1), syms)

    @settings(max_examples=40, deadline=None)
    @given(sf=st.integers(7, 12), A=st.floats(0.01, 100), data=st.data())
    def test_energy_and_phase_law(self, sf, A, data):
        p = ModulationParams(sf, A)
        m = data.draw(st.integers(0, p.M - 1))
        x = modulate(m, p).samples
        assert np.sum(np.abs(x) ** 2) == pytest.approx(A * A * p.M, rel=1e-12)
        bin_m = demod_fft(dechirp(x, p), p).bins[0, m]
        expected = A * math.sqrt(p.M) * cmath.exp(1j * symbol_phase(m, p))
        assert abs(bin_m - expected) < 1e-9 * A * math.sqrt(p.M)
