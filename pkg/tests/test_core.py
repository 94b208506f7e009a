import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from csiratio import CsiFrame, CsiRatioSeries, CsiStream, DenominatorUnderflow, amplitude, csi_ratio, phase

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def complex_series(min_size=1, max_size=64, min_mag=1e-3):
    def build(parts):
        re, im = parts
        z = re + 1j * im
        # keep magnitudes away from the floor so the property is about cancellation, not underflow
        small = np.abs(z) < min_mag
        z[small] = min_mag
        return z

    n = st.integers(min_size, max_size)
    return n.flatmap(lambda k: st.tuples(arrays(np.float64, k, elements=finite), arrays(np.float64, k, elements=finite))).map(build)


class TestCsiRatio:
    def test_identity(self):
        h = np.array([1 + 2j, -3 + 0.5j, 0.1 - 0.1j])
        np.testing.assert_allclose(csi_ratio(h, h), np.ones(3, dtype=complex), rtol=0, atol=1e-15)

    def test_scaling(self):
        h = np.array([1 + 2j, -3 + 0.5j, 0.1 - 0.1j])
        np.testing.assert_allclose(csi_ratio(2 * h, h), np.full(3, 2 + 0j), rtol=0, atol=1e-15)

    def test_random_phase_offset_cancels(self):
        rng = np.random.default_rng(3)
        h1 = rng.standard_normal(500) + 1j * rng.standard_normal(500)
        h2 = rng.standard_normal(500) + 1j * rng.standard_normal(500)
        g = np.exp(-1j * rng.uniform(0, 2 * np.pi, 500))
        np.testing.assert_allclose(csi_ratio(g * h1, g * h2), csi_ratio(h1, h2), rtol=1e-13)

    def test_underflow_reports_index(self):
        den = np.array([1.0, 1.0, 1e-12, 1.0], dtype=complex)
        with pytest.raises(DenominatorUnderflow) as info:
            csi_ratio(np.ones(4), den)
        assert "2" in str(info.value)

    def test_nan_denominator_is_rejected(self):
        with pytest.raises(DenominatorUnderflow):
            csi_ratio(np.ones(2), np.array([1.0, np.nan]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            csi_ratio(np.ones(3), np.ones(4))

    def test_floor_must_be_positive(self):
        with pytest.raises(ValueError):
            csi_ratio(np.ones(3), np.ones(3), floor=0.0)

    @given(complex_series(), st.data())
    def test_common_factor_cancels(self, h, data):
        h1 = h
        h2 = data.draw(complex_series(len(h), len(h)))
        g = data.draw(complex_series(len(h), len(h), min_mag=1e-2))
        got = csi_ratio(g * h1, g * h2)
        want = csi_ratio(h1, h2)
        np.testing.assert_allclose(got, want, rtol=1e-12, atol=0)

    @given(complex_series(), st.data())
    def test_reciprocal(self, h1, data):
        h2 = data.draw(complex_series(len(h1), len(h1)))
        np.testing.assert_allclose(csi_ratio(h1, h2) * csi_ratio(h2, h1), 1.0, rtol=1e-12)


class TestAmplitudePhase:
    def test_pythagorean(self):
        z = np.full(4, 3 + 4j)
        np.testing.assert_allclose(amplitude(z), 5.0)
        np.testing.assert_allclose(phase(z), np.arctan2(4, 3))

    def test_unwrap_through_minus_pi(self):
        ang = np.linspace(-2.5, -4.0, 200)  # clockwise across -pi
        ph = phase(np.exp(1j * ang))
        assert np.all(np.diff(ph) < 0)
        assert np.max(np.abs(np.diff(ph))) < np.pi
        np.testing.assert_allclose(ph - ph[0], ang - ang[0], atol=1e-12)

    def test_zero_sample_flagged(self):
        ph, flag = phase(np.array([1j, 0, -1]), return_degenerate=True)
        np.testing.assert_array_equal(flag, [False, True, False])
        assert np.all(np.isfinite(ph))

    def test_ratio_modulus(self):
        rng = np.random.default_rng(0)
        h1 = rng.standard_normal(50) + 1j * rng.standard_normal(50)
        h2 = rng.standard_normal(50) + 1j * rng.standard_normal(50)
        np.testing.assert_allclose(amplitude(csi_ratio(h1, h2)), amplitude(h1) / amplitude(h2), rtol=1e-14)

    @given(complex_series())
    def test_round_trip(self, z):
        back = amplitude(z) * np.exp(1j * phase(z))
        np.testing.assert_allclose(back, z, rtol=1e-12, atol=0)


class TestContainers:
    def test_frame_validation(self):
        f = CsiFrame(0.5, np.ones((2, 30)))
        assert (f.n_antennas, f.n_subcarriers) == (2, 30)
        with pytest.raises(ValueError):
            CsiFrame(0.0, np.array([[np.inf, 1.0]]))
        with pytest.raises(ValueError):
            CsiFrame(0.0, np.ones(3))

    def test_stream_requires_increasing_timestamps(self):
        with pytest.raises(ValueError):
            CsiStream(np.array([0.0, 0.0, 0.02]), np.ones((3, 2, 4)), 100.0)

    def test_stream_is_immutable(self):
        s = CsiStream(np.arange(3) / 100, np.ones((3, 2, 4)), 100.0)
        with pytest.raises(ValueError):
            s.values[0, 0, 0] = 2

    def test_frames_round_trip(self):
        rng = np.random.default_rng(1)
        v = rng.standard_normal((5, 2, 3)) + 1j * rng.standard_normal((5, 2, 3))
        s = CsiStream(np.arange(5) / 100, v, 100.0)
        back = CsiStream.from_frames(list(s), 100.0)
        np.testing.assert_array_equal(back.values, s.values)
        assert back.duration == pytest.approx(0.05)

    def test_ratio_series(self):
        rng = np.random.default_rng(2)
        v = rng.standard_normal((8, 2, 3)) + 1j * rng.standard_normal((8, 2, 3))
        s = CsiStream(np.arange(8) / 100, v, 100.0)
        series = s.ratio_series()
        assert [r.subcarrier for r in series] == [0, 1, 2]
        np.testing.assert_array_equal(series[1].samples, v[:, 0, 1] / v[:, 1, 1])
        assert isinstance(series[0], CsiRatioSeries) and series[0].duration == pytest.approx(0.08)
        with pytest.raises(ValueError):
            s.ratio((1, 1))
