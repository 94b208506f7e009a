import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from csiratio import (
    BreathingModel,
    EstimatorConfig,
    MotionEvent,
    NoiseModel,
    NoPeak,
    ZeroVariance,
    autocorrelation,
    estimate_rate,
    first_peak_lag,
    make_scene,
    motion_gate,
    synthesize,
)
from csiratio.extract import ExtractionResult, ProjectionCandidate
from csiratio.rate import AutocorrSeries, combine_subcarriers, estimate_from_ratio, estimate_window, lag_to_bpm
from oracles import autocorr_direct

FS = 100.0


def result(sub, bnr, series):
    return ExtractionResult(ProjectionCandidate(0.0, series, bnr), {0.0: bnr}, sub)


def pair(sub, bnr, series):
    return result(sub, bnr, series), autocorrelation(series)


class TestAutocorrelation:
    def test_lag_zero(self):
        y = np.random.default_rng(0).standard_normal(50)
        assert autocorrelation(y).values[0] == 1.0

    @given(st.integers(2, 2000), st.integers(0, 10_000))
    def test_matches_direct_summation(self, n, seed):
        y = np.cumsum(np.random.default_rng(seed).standard_normal(n))
        if np.ptp(y) == 0:
            return
        r = autocorrelation(y).values
        np.testing.assert_allclose(r, autocorr_direct(y), rtol=0, atol=1e-9)
        assert np.all(np.abs(r) <= 1 + 1e-9)

    @pytest.mark.parametrize("period", [170, 250, 333, 480])
    def test_integer_period(self, period):
        y = np.sin(2 * np.pi * np.arange(60 * period) / period + 0.3)
        r = autocorr_direct(y, max_lag=2 * period)
        assert abs(first_peak_lag(r, 162) - period) <= 1
        assert first_peak_lag(autocorrelation(y).values[: 2 * period + 1], 162) == first_peak_lag(r, 162)

    def test_white_noise(self):
        rng = np.random.default_rng(21)
        quiet = 0
        for _ in range(100):
            r = autocorr_direct(rng.standard_normal(1200))
            quiet += np.all(np.abs(r[30:601]) < 0.15)
        assert quiet >= 95

    def test_constant(self):
        with pytest.raises(ZeroVariance):
            autocorrelation(np.full(20, 4.0))


class TestFirstPeak:
    def test_worked_example(self):
        k = np.arange(1200)
        r = np.cos(2 * np.pi * k / 335)
        lag = first_peak_lag(AutocorrSeries(r, FS), 160, 0.1)
        assert lag == 335
        assert lag_to_bpm(lag, FS) == 60 / (335 / 100)
        assert round(lag_to_bpm(lag, FS), 1) == 17.9

    def test_twenty_bpm_pattern(self):
        y = np.sin(2 * np.pi * 20 / 60 * np.arange(1200) / FS)
        assert abs(first_peak_lag(autocorr_direct(y), 160) - 300) <= 1

    def test_monotone_has_no_peak(self):
        with pytest.raises(NoPeak):
            first_peak_lag(np.exp(-np.arange(1200) / 300), 160)

    def test_peaks_below_min_lag_are_skipped(self):
        k = np.arange(1200)
        r = np.cos(2 * np.pi * k / 100)
        assert first_peak_lag(r, 162) == 200

    def test_negative_peaks_need_height(self):
        k = np.arange(800)
        r = np.cos(2 * np.pi * k / 400) + 0.3 * np.cos(2 * np.pi * k / 50)
        lag_any = first_peak_lag(r, 160, min_height=None)
        lag_pos = first_peak_lag(r, 160)
        assert r[lag_any] < 0 < r[lag_pos] and lag_pos > lag_any
        assert first_peak_lag(r, 160, min_height=0.9) >= 350

    def test_max_lag(self):
        r = np.cos(2 * np.pi * np.arange(1200) / 700)
        with pytest.raises(NoPeak):
            first_peak_lag(r, 160, max_lag=632)

    def test_lag_bounds(self):
        # band [10, 37] bpm widened by 0.5 bpm on each side
        assert EstimatorConfig().lag_bounds() == (160, 632)

    @given(st.floats(17, 19))
    def test_resolution(self, rate):
        lag = round(60 * FS / rate)
        step = lag_to_bpm(lag, FS) - lag_to_bpm(lag + 1, FS)
        assert step < 0.06
        assert abs(lag_to_bpm(lag, FS) - rate) <= step


class TestCombine:
    def test_single(self):
        y = np.sin(np.arange(300) / 7.0)
        fused, chosen = combine_subcarriers([pair(5, 0.4, y)])
        np.testing.assert_allclose(fused.values, autocorrelation(y).values, atol=1e-15)
        assert chosen == [5]

    def test_worked_example_structure(self):
        rng = np.random.default_rng(1)
        bnrs = rng.uniform(0.01, 0.05, 30)
        bnrs[[4, 8, 17]] = [0.30, 0.27, 0.25]
        pairs = [pair(k, b, rng.standard_normal(200)) for k, b in enumerate(bnrs)]
        assert combine_subcarriers(pairs, 0.7)[1] == [4, 8, 17]

    def test_gate_arithmetic(self):
        y = np.sin(np.arange(300) / 7.0)
        assert combine_subcarriers([pair(0, 0.5, y), pair(1, 0.2, y)], 0.7)[1] == [0]

    def test_weights(self):
        rng = np.random.default_rng(2)
        a, b = rng.standard_normal(300), rng.standard_normal(300)
        fused, chosen = combine_subcarriers([pair(0, 0.5, a), pair(1, 0.4, b)], 0.7)
        want = 0.5 * autocorr_direct(a) + 0.4 * autocorr_direct(b)
        np.testing.assert_allclose(fused.values, want / want[0], atol=1e-12)
        assert chosen == [0, 1]

    @given(st.integers(0, 10_000), st.permutations(range(6)))
    def test_order_and_scale_invariant(self, seed, perm):
        rng = np.random.default_rng(seed)
        series = [np.cumsum(rng.standard_normal(150)) for _ in range(6)]
        bnrs = rng.uniform(0.05, 0.5, 6)
        base = combine_subcarriers([pair(k, bnrs[k], series[k]) for k in range(6)])
        scales = rng.uniform(0.1, 10, 6)
        other = combine_subcarriers([pair(k, bnrs[k], scales[k] * series[k]) for k in perm])
        assert base[1] == other[1]
        np.testing.assert_allclose(base[0].values, other[0].values, atol=1e-12)

    def test_invalid(self):
        with pytest.raises(ValueError):
            combine_subcarriers([])
        with pytest.raises(ValueError):
            combine_subcarriers([pair(0, 0.1, np.arange(5.0))], gate=0)


def scene_stream(rate=18.2, snr=10.0, duration=20.0, seed=0, events=(), n_sub=30, **kw):
    scene = make_scene(n_subcarriers=n_sub, breathing=BreathingModel(rate=rate), snr_db=snr, seed=seed, **kw)
    return synthesize(scene, duration, list(events), seed=seed)


class TestMotionGate:
    def test_no_events_all_stationary(self):
        stream, _ = scene_stream(duration=30, seed=3)
        assert motion_gate(stream.ratio()).labels.all()

    def test_event_windows_flagged(self):
        stream, truth = scene_stream(duration=20, seed=4, events=[MotionEvent(8.0, 9.0, 0.5)])
        mask = motion_gate(stream.ratio())
        np.testing.assert_array_equal(mask.labels, truth.window_stationary(1.0))

    def test_noise_only_is_stationary_and_undetectable(self):
        scene = make_scene(n_subcarriers=30, dynamic_amplitude=(0.0, 0.0), noise=NoiseModel(0.3), seed=5)
        stream, truth = synthesize(scene, 20.0, seed=5)
        assert not truth.has_target
        assert motion_gate(stream.ratio()).labels.all()
        ests = estimate_rate(stream)
        assert all(e.stationary for e in ests)
        assert sum(e.status == "no_peak" for e in ests) >= 0.8 * len(ests)

    def test_window_validation(self):
        with pytest.raises(ValueError):
            motion_gate(np.ones((300, 2), complex), window=0.5)


class TestEstimateRate:
    def test_mid_snr_scene(self):
        stream, truth = scene_stream(rate=18.2, snr=10.0, duration=20.0, seed=1)
        ests = estimate_rate(stream)
        assert len(ests) == 9
        for e in ests:
            assert e.ok and abs(e.rate_bpm - truth.rate_bpm) < 0.5
            assert e.rate_bpm == 60 / (e.first_peak_lag / 100) and e.in_band
            assert set(e.contributing_subcarriers) <= set(e.per_subcarrier_bnr)
            assert 0 <= min(e.per_subcarrier_bnr.values()) <= max(e.per_subcarrier_bnr.values()) <= 1

    def test_no_target(self):
        scene = make_scene(n_subcarriers=8, dynamic_amplitude=(0.0, 0.0), seed=2)
        stream, _ = synthesize(scene, 12.0)
        est = estimate_rate(stream)
        assert [e.status for e in est] == ["no_peak"]
        with pytest.raises(NoPeak):
            estimate_window(stream.ratio())

    def test_motion_windows_non_stationary(self):
        stream, _ = scene_stream(duration=30.0, seed=6, events=[MotionEvent(20.0, 21.5, 0.5)])
        ests = estimate_rate(stream)
        for e in ests:
            overlaps = e.start_time < 21.5 and e.end_time > 20.0
            assert e.status == ("non_stationary" if overlaps else "ok")

    def test_frame_iterable_and_rate_mismatch(self):
        stream, _ = scene_stream(duration=12.0, n_sub=4, seed=2)
        a = estimate_rate(list(stream))
        b = estimate_rate(stream)
        assert [e.rate_bpm for e in a] == [e.rate_bpm for e in b]
        with pytest.raises(ValueError):
            estimate_rate(stream, EstimatorConfig(sample_rate=50.0))
        with pytest.raises(TypeError):
            estimate_rate([1, 2, 3])

    def test_short_stream(self):
        with pytest.raises(ValueError):
            estimate_from_ratio(np.ones((500, 3), complex))

    def test_window_cadence(self):
        stream, _ = scene_stream(duration=15.0, n_sub=4, seed=2)
        ests = estimate_rate(stream, EstimatorConfig(step=2.0))
        assert [e.start_time for e in ests] == [0.0, 2.0]
        assert ests[0].end_time == 12.0

    def test_selection_strategies_run(self):
        stream, _ = scene_stream(duration=12.0, n_sub=6, seed=7)
        for sel in ("variance", "i", "q"):
            (e,) = estimate_rate(stream, EstimatorConfig(selection=sel))
            assert e.status in ("ok", "no_peak")
