"""Respiration-rate estimation from CSI-ratio streams.

Per 12 s window: ratio -> motion gate -> Savitzky-Golay -> best projection
per subcarrier -> autocorrelation -> BNR-weighted fusion of the good
subcarriers -> first autocorrelation peak -> ``60 * fs / lag`` bpm.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.signal import detrend, find_peaks

from .core import DEFAULT_FLOOR, CsiFrame, CsiRatioSeries, CsiStream
from .exceptions import NoPeak, NonStationary, ZeroVariance
from .extract import (
    DEFAULT_BAND,
    DEFAULT_FFT_SIZE,
    DEFAULT_SG_ORDER,
    DEFAULT_SG_WINDOW,
    DEFAULT_THETA_STEP,
    ExtractionResult,
    extract_all,
    select,
    smooth,
)
from .validation import check_band, check_real_series

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_NON_STATIONARY = NonStationary.code
STATUS_NO_PEAK = NoPeak.code


@dataclass(frozen=True)
class AutocorrSeries:
    values: np.ndarray
    fs: float

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class StationarityMask:
    labels: np.ndarray  # True = stationary
    window: float
    sample_rate: float
    scores: Optional[np.ndarray] = None

    def window_slices(self, n_samples: int):
        n = max(1, int(round(self.window * self.sample_rate)))
        return [slice(s, min(s + n, n_samples)) for s in range(0, n_samples, n)]

    def is_stationary(self, start: int, stop: int) -> bool:
        """True when every gate window overlapping samples ``[start, stop)`` is stationary."""
        n = max(1, int(round(self.window * self.sample_rate)))
        first, last = start // n, (stop - 1) // n
        return bool(np.all(self.labels[first : last + 1]))


@dataclass
class RateEstimate:
    rate_bpm: float
    first_peak_lag: Optional[int]
    contributing_subcarriers: List[int]
    per_subcarrier_bnr: Dict[int, float]
    stationary: bool
    start_time: float = 0.0
    end_time: float = 0.0
    status: str = STATUS_OK
    in_band: bool = True
    fused: Optional[AutocorrSeries] = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


@dataclass(frozen=True)
class EstimatorConfig:
    sample_rate: float = 100.0
    window: float = 12.0
    step: float = 1.0
    theta_step: float = DEFAULT_THETA_STEP
    fft_size: int = DEFAULT_FFT_SIZE
    band: Tuple[float, float] = DEFAULT_BAND
    gate: float = 0.7
    sg_window: int = DEFAULT_SG_WINDOW
    sg_order: int = DEFAULT_SG_ORDER
    prominence: float = 0.1
    # noise-only windows rarely reach 0.3; real breathing peaks sit well above it
    min_peak_height: Optional[float] = 0.3
    harmonic_guard: bool = True
    lag_margin_bpm: float = 0.5
    motion_window: float = 1.0
    motion_threshold: float = 0.3
    motion_excursion: float = 25.0
    antenna_pair: Tuple[int, int] = (0, 1)
    floor: float = DEFAULT_FLOOR
    selection: str = "bnr"

    @property
    def window_samples(self) -> int:
        return int(round(self.window * self.sample_rate))

    @property
    def step_samples(self) -> int:
        return max(1, int(round(self.step * self.sample_rate)))

    def lag_bounds(self) -> Tuple[int, int]:
        """Lag range searched for the breathing period.

        The band is widened by ``lag_margin_bpm`` on both ends because the
        tapered autocorrelation pulls peaks slightly toward shorter lags.
        """
        lo, hi = check_band(self.band, self.sample_rate)
        fast = hi + self.lag_margin_bpm
        slow = max(lo - self.lag_margin_bpm, 1e-6)
        return (
            int(np.floor(60.0 * self.sample_rate / fast)),
            int(np.ceil(60.0 * self.sample_rate / slow)),
        )


def autocorrelation(y, fs: float = 100.0) -> AutocorrSeries:
    """Normalized sample autocorrelation for lags ``0 .. T-1``.

    ``r(k) = sum_{t>k} (y_t - m)(y_{t-k} - m) / sum_t (y_t - m)^2``, computed
    through a zero-padded FFT.
    """
    y = check_real_series(y, min_length=2)
    r, ok = _autocorr_columns(y[:, None])
    if not ok[0]:
        raise ZeroVariance("autocorrelation of a constant series")
    return AutocorrSeries(r[:, 0], fs)


def _autocorr_columns(Y):
    """Column-wise normalized autocorrelation; constant columns are flagged, not raised."""
    yc = Y - Y.mean(axis=0)
    den = np.sum(yc * yc, axis=0)
    ok = den >= 1e-30
    n = yc.shape[0]
    nfft = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(yc, nfft, axis=0)
    r = np.fft.irfft(spec.real**2 + spec.imag**2, nfft, axis=0)[:n] / np.where(ok, den, 1.0)
    r[0] = 1.0
    return r, ok


def first_peak_lag(
    r: AutocorrSeries,
    min_lag: int,
    prominence: float = 0.1,
    max_lag: Optional[int] = None,
    min_height: Optional[float] = 0.0,
) -> int:
    """Smallest lag in ``[min_lag, max_lag]`` that is a local maximum of ``r``
    with at least ``prominence``.

    Peaks below ``min_lag`` are skipped.  A peak must also exceed
    ``min_height`` so local maxima inside an anti-correlated trough are
    ignored; pass ``None`` to disable this.
    """
    values = r.values if isinstance(r, AutocorrSeries) else np.asarray(r, dtype=np.float64)
    if max_lag is None:
        max_lag = len(values) - 1
    peaks, _ = find_peaks(values, prominence=prominence)
    ok = peaks[(peaks >= min_lag) & (peaks <= max_lag)]
    if min_height is not None:
        ok = ok[values[ok] > min_height]
    if len(ok) == 0:
        raise NoPeak(f"no autocorrelation peak with prominence >= {prominence} in lags [{min_lag}, {max_lag}]")
    return int(ok[0])


def lag_to_bpm(lag: int, fs: float) -> float:
    return 60.0 / (lag / fs)


def combine_subcarriers(
    results: Sequence[Tuple[ExtractionResult, AutocorrSeries]], gate: float = 0.7
) -> Tuple[AutocorrSeries, List[int]]:
    """BNR-weighted sum of the autocorrelations whose BNR exceeds ``gate``
    times the best BNR, renormalized to 1 at lag 0.

    Returns the fused series and the sorted contributing subcarrier indices.
    The best subcarrier always qualifies.
    """
    if not results:
        raise ValueError("need at least one subcarrier result")
    if not 0 < gate <= 1:
        raise ValueError("gate must lie in (0, 1]")
    ordered = sorted(results, key=lambda item: item[0].subcarrier)
    eps = max(res.best.bnr for res, _ in ordered)
    chosen = [(res, ac) for res, ac in ordered if res.best.bnr > gate * eps or res.best.bnr == eps]
    fused = np.zeros_like(chosen[0][1].values)
    weight = 0.0
    for res, ac in chosen:
        fused += res.best.bnr * ac.values
        weight += res.best.bnr
    if weight > 0:
        fused = fused / fused[0]
    else:
        fused = chosen[0][1].values.copy()
    return AutocorrSeries(fused, chosen[0][1].fs), [res.subcarrier for res, _ in chosen]


def _ratio_block(ratio) -> Tuple[np.ndarray, float]:
    if isinstance(ratio, CsiRatioSeries):
        return ratio.samples[:, None], ratio.sample_rate
    if isinstance(ratio, (list, tuple)) and ratio and isinstance(ratio[0], CsiRatioSeries):
        return np.column_stack([r.samples for r in ratio]), ratio[0].sample_rate
    x = np.asarray(ratio, dtype=np.complex128)
    return (x[:, None] if x.ndim == 1 else x), None


def motion_gate(
    ratio,
    window: float = 1.0,
    threshold: float = 0.3,
    fs: Optional[float] = None,
    excursion_bound: float = 25.0,
) -> StationarityMask:
    """Flag windows dominated by large body motion.

    Each ``window``-second block of every subcarrier is detrended and
    transformed.  Per subcarrier, the block scores the energy above 1 Hz
    less that subcarrier's median level for the band (its noise floor), as a
    fraction of the block's energy; a second score is the block energy over
    the subcarrier's median block energy.  Scores are reduced by the median
    across subcarriers, so a few subcarriers near a deep fade cannot decide
    alone.  A block is non-stationary when the fraction exceeds
    ``threshold`` or the excursion exceeds ``excursion_bound``.  The median
    baselines assume motion occupies less than half of the stream.
    """
    if window < 1.0:
        raise ValueError("motion window must be at least 1 s")
    x, ratio_fs = _ratio_block(ratio)
    fs = fs or ratio_fs or 100.0
    n = int(round(window * fs))
    starts = list(range(0, x.shape[0], n))
    e_hf = np.full((len(starts), x.shape[1]), np.nan)
    e_tot = np.full((len(starts), x.shape[1]), np.nan)
    for w, s in enumerate(starts):
        block = x[s : s + n]
        if len(block) < 8:
            continue
        b = detrend(block.real, axis=0) + 1j * detrend(block.imag, axis=0)
        power = np.abs(np.fft.fft(b, axis=0)) ** 2 / len(b)
        freqs = np.abs(np.fft.fftfreq(len(b), 1.0 / fs))
        e_hf[w] = power[freqs > 1.0].sum(axis=0)
        e_tot[w] = power[freqs > 0].sum(axis=0)
    valid = ~np.isnan(e_tot[:, 0])
    frac = np.zeros(len(starts))
    excursion = np.zeros(len(starts))
    if valid.any():
        base_hf = np.median(e_hf[valid], axis=0)
        base_tot = np.median(e_tot[valid], axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(e_tot[valid] > 0, np.maximum(e_hf[valid] - base_hf, 0.0) / e_tot[valid], 0.0)
            ex = np.where(base_tot > 0, e_tot[valid] / base_tot, 0.0)
        frac[valid] = np.median(f, axis=1)
        excursion[valid] = np.median(ex, axis=1)
    labels = ~((frac > threshold) | (excursion > excursion_bound))
    # short tail blocks inherit their neighbour's label
    for w in np.flatnonzero(~valid):
        labels[w] = labels[w - 1] if w > 0 else True
    return StationarityMask(labels, window, fs, frac)


def _window_estimate(smoothed, start, stop, stationary, config: EstimatorConfig, t0, t1) -> RateEstimate:
    fs = config.sample_rate
    est = RateEstimate(np.nan, None, [], {}, stationary, t0, t1)
    if not stationary:
        est.status = STATUS_NON_STATIONARY
        return est
    block = smoothed[start:stop]
    if config.selection == "bnr":
        results = extract_all(
            block, config.theta_step, fs, config.band, config.fft_size, harmonic_guard=config.harmonic_guard
        )
    else:
        results = []
        for k in range(block.shape[1]):
            res = select(
                CsiRatioSeries(k, block[:, k], fs),
                config.selection,
                theta_step=config.theta_step,
                fs=fs,
                band=config.band,
                fft_size=config.fft_size,
            )
            if not res.degenerate:
                results.append(res)
    pairs = []
    if results:
        acs, ok = _autocorr_columns(np.column_stack([res.best.series for res in results]))
        pairs = [(res, AutocorrSeries(acs[:, i], fs)) for i, res in enumerate(results) if ok[i]]
    est.per_subcarrier_bnr = {res.subcarrier: res.best.bnr for res, _ in pairs}
    if not pairs:
        est.status = STATUS_NO_PEAK
        return est
    fused, chosen = combine_subcarriers(pairs, config.gate)
    est.contributing_subcarriers = chosen
    est.fused = fused
    lo, hi = config.lag_bounds()
    try:
        lag = first_peak_lag(fused, lo, config.prominence, hi, config.min_peak_height)
    except NoPeak:
        est.status = STATUS_NO_PEAK
        return est
    est.first_peak_lag = lag
    est.rate_bpm = lag_to_bpm(lag, fs)
    band_lo, band_hi = config.band
    est.in_band = band_lo <= est.rate_bpm <= band_hi
    return est


def _as_stream(frames, sample_rate) -> CsiStream:
    if isinstance(frames, CsiStream):
        return frames
    frames = list(frames)
    if frames and isinstance(frames[0], CsiFrame):
        return CsiStream.from_frames(frames, sample_rate)
    raise TypeError("expected a CsiStream or an iterable of CsiFrame")


def estimate_from_ratio(ratio, config: EstimatorConfig = EstimatorConfig(), start_time: float = 0.0):
    """Windowed estimates from a precomputed ``(T, K)`` ratio block."""
    x = np.asarray(ratio, dtype=np.complex128)
    if x.ndim == 1:
        x = x[:, None]
    fs = config.sample_rate
    n_win, n_step = config.window_samples, config.step_samples
    if x.shape[0] < n_win:
        raise ValueError(f"stream of {x.shape[0]} samples is shorter than one {config.window} s window")
    mask = motion_gate(x, config.motion_window, config.motion_threshold, fs, config.motion_excursion)
    smoothed = smooth(x, config.sg_window, config.sg_order)
    out = []
    for s in range(0, x.shape[0] - n_win + 1, n_step):
        stationary = mask.is_stationary(s, s + n_win)
        t0 = start_time + s / fs
        est = _window_estimate(smoothed, s, s + n_win, stationary, config, t0, t0 + n_win / fs)
        logger.debug("window %.1f-%.1f s: %s %.3f", est.start_time, est.end_time, est.status, est.rate_bpm)
        out.append(est)
    return out


def estimate_rate(frames: Union[CsiStream, Iterable[CsiFrame]], config: EstimatorConfig = EstimatorConfig()):
    """One :class:`RateEstimate` per sliding window of the stream.

    Windows that overlap detected motion get status ``non_stationary``;
    windows without a qualifying autocorrelation peak get ``no_peak``.
    """
    stream = _as_stream(frames, config.sample_rate)
    if stream.sample_rate != config.sample_rate:
        raise ValueError(f"stream rate {stream.sample_rate} Hz differs from config {config.sample_rate} Hz")
    ratio = stream.ratio(config.antenna_pair, config.floor)
    return estimate_from_ratio(ratio, config, start_time=float(stream.timestamps[0]))


def estimate_window(ratio, config: EstimatorConfig = EstimatorConfig()) -> RateEstimate:
    """Estimate for a single window; raises instead of returning a status."""
    x = np.asarray(ratio, dtype=np.complex128)
    if x.ndim == 1:
        x = x[:, None]
    smoothed = smooth(x, config.sg_window, config.sg_order)
    est = _window_estimate(smoothed, 0, x.shape[0], True, config, 0.0, x.shape[0] / config.sample_rate)
    if est.status == STATUS_NO_PEAK:
        raise NoPeak("respiration not detectable in this window")
    return est
