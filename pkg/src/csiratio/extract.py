"""Respiration pattern extraction from a complex CSI-ratio window.

The ratio is projected on axes ``[cos(theta), sin(theta)]`` for a grid of
angles; each projection is scored by its breathing-to-noise ratio (BNR), the
energy of the strongest in-band FFT bin over the energy of all positive
frequency bins, and the best-scoring projection is kept.
"""

from __future__ import annotations

import dataclasses
import functools
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np
from scipy.signal import savgol_filter

from .core import CsiRatioSeries
from .exceptions import BadFilterParams, ZeroEnergy
from .validation import check_band, check_complex_series, check_real_series

DEFAULT_BAND = (10.0, 37.0)
DEFAULT_FFT_SIZE = 8192
DEFAULT_THETA_STEP = np.pi / 50
DEFAULT_SG_WINDOW = 51
DEFAULT_SG_ORDER = 3
ZERO_ENERGY = 1e-30


@dataclass(frozen=True)
class ProjectionCandidate:
    theta: float
    series: np.ndarray
    bnr: float


@dataclass(frozen=True)
class ExtractionResult:
    """Best projection of one subcarrier and the score of every candidate.

    ``scores`` maps theta to the selection criterion (BNR for
    :func:`extract_pattern`, variance for :func:`select_by_variance`).
    ``best.bnr`` is always the BNR of the kept series.
    """

    best: ProjectionCandidate
    scores: Dict[float, float]
    subcarrier: int = 0
    criterion: str = "bnr"
    degenerate: bool = False

    @property
    def all_bnr(self) -> Dict[float, float]:
        if self.criterion != "bnr":
            raise AttributeError(f"candidates were scored by {self.criterion}, not BNR")
        return self.scores


def smooth(series, window: int = DEFAULT_SG_WINDOW, order: int = DEFAULT_SG_ORDER):
    """Savitzky-Golay filter applied to real and imaginary parts separately.

    Edges are handled by evaluating the polynomial fitted to the first/last
    full window, so the output has the input's length.
    """
    x = np.asarray(series)
    if window <= 0 or window % 2 == 0:
        raise BadFilterParams(f"window must be a positive odd integer, got {window}")
    if not 0 <= order < window:
        raise BadFilterParams(f"order must satisfy 0 <= order < window, got {order}")
    if x.shape[0] < window:
        raise BadFilterParams(f"series of length {x.shape[0]} is shorter than window {window}")
    if np.iscomplexobj(x):
        re = savgol_filter(x.real, window, order, axis=0, mode="interp")
        im = savgol_filter(x.imag, window, order, axis=0, mode="interp")
        return re + 1j * im
    return savgol_filter(x.astype(np.float64), window, order, axis=0, mode="interp")


def project(series, theta: float) -> np.ndarray:
    x = np.asarray(series, dtype=np.complex128)
    return x.real * np.cos(theta) + x.imag * np.sin(theta)


def band_bins(fs: float, fft_size: int, band=DEFAULT_BAND) -> slice:
    """rfft bin indices whose frequency lies inside ``band`` (bpm)."""
    lo, hi = check_band(band, fs)
    df = fs / fft_size
    first = int(np.ceil(lo / 60.0 / df - 1e-9))
    last = int(np.floor(hi / 60.0 / df + 1e-9))
    first = max(first, 1)
    if last < first:
        raise ValueError(f"band {band} bpm contains no FFT bin at fft_size={fft_size}")
    return slice(first, last + 1)


def bnr(series, fs: float = 100.0, band=DEFAULT_BAND, fft_size: int = DEFAULT_FFT_SIZE) -> float:
    """Breathing-to-noise ratio of a real series.

    The mean is removed and the series zero-padded to ``fft_size``.  Returns
    the energy of the strongest bin inside ``band`` divided by the summed
    energy of bins ``1 .. fft_size // 2`` (DC excluded).
    """
    y = check_real_series(series, min_length=2)
    if len(y) > fft_size:
        raise ValueError(f"series length {len(y)} exceeds fft_size {fft_size}")
    sl = band_bins(fs, fft_size, band)
    spec = np.fft.rfft(y - y.mean(), n=fft_size)
    energy = spec.real**2 + spec.imag**2
    total = energy[1:].sum()
    if total < ZERO_ENERGY:
        raise ZeroEnergy("series has no variation")
    return float(energy[sl].max() / total)


def theta_grid(theta_step: float = DEFAULT_THETA_STEP) -> np.ndarray:
    if not 0 < theta_step <= np.pi:
        raise ValueError("theta_step must lie in (0, pi]")
    n = int(round(2 * np.pi / theta_step))
    return np.arange(n) * theta_step


def _window_samples(x):
    if isinstance(x, CsiRatioSeries):
        return x.samples, x.subcarrier, x.sample_rate
    return check_complex_series(x, min_length=2), 0, None


@functools.lru_cache(maxsize=16)
def _dft_rows(n_samples: int, fft_size: int, first: int, stop: int) -> np.ndarray:
    k = np.arange(first, stop)[:, None]
    t = np.arange(n_samples)[None, :]
    return np.exp(-2j * np.pi * ((k * t) % fft_size) / fft_size)


@dataclass(frozen=True)
class _Spectra:
    """In-band spectra of the I and Q parts plus their positive-bin energies."""

    band_i: np.ndarray  # (n_bins, K)
    band_q: np.ndarray
    e_ii: np.ndarray  # (K,)
    e_qq: np.ndarray
    e_iq: np.ndarray

    def total(self, c, s):
        """Positive-bin energy of the projection ``c I + s Q``."""
        return c * c * self.e_ii + s * s * self.e_qq + 2 * c * s * self.e_iq


def _spectra(x, fft_size, sl) -> _Spectra:
    """Zero-padded spectra of mean-removed I and Q without a full FFT.

    Only the in-band bins are evaluated, by a direct DFT.  Energy over bins
    ``1 .. fft_size // 2`` follows from Parseval: for a real zero-mean series
    it is ``(N sum y^2 + X_{N/2}^2) / 2`` with ``X_{N/2} = sum (-1)^t y_t``.
    """
    n = x.shape[0]
    if n > fft_size:
        raise ValueError(f"window length {n} exceeds fft_size {fft_size}")
    x = x - x.mean(axis=0)
    i, q = x.real, x.imag
    rows = _dft_rows(n, fft_size, sl.start, sl.stop)
    alt = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    ni, nq = alt @ i, alt @ q
    return _Spectra(
        band_i=rows @ i,
        band_q=rows @ q,
        e_ii=0.5 * (fft_size * np.sum(i * i, axis=0) + ni * ni),
        e_qq=0.5 * (fft_size * np.sum(q * q, axis=0) + nq * nq),
        e_iq=0.5 * (fft_size * np.sum(i * q, axis=0) + ni * nq),
    )


def _scan(sp: _Spectra, thetas):
    c = np.cos(thetas)[:, None]
    s = np.sin(thetas)[:, None]
    total = sp.total(c, s)  # (n_theta, K)
    comb = c[:, None, :] * sp.band_i[None] + s[:, None, :] * sp.band_q[None]  # (n_theta, n_bins, K)
    peak = np.max(comb.real**2 + comb.imag**2, axis=1)
    scale = np.maximum(sp.e_ii + sp.e_qq, ZERO_ENERGY)
    dead = total <= np.maximum(1e-12 * scale, ZERO_ENERGY)
    out = np.where(dead, 0.0, peak / np.where(dead, 1.0, total))
    return np.clip(out, 0.0, 1.0)


def bnr_scan(samples, thetas, fs, band=DEFAULT_BAND, fft_size=DEFAULT_FFT_SIZE):
    """BNR of every projection in ``thetas`` for one or many subcarriers.

    ``samples`` is ``(T,)`` or ``(T, K)``; the result is ``(len(thetas),)``
    or ``(len(thetas), K)``.  Projection is linear, so the spectra of all
    candidates are combinations of the I and Q spectra, which are computed
    once per subcarrier regardless of the grid size.  Candidates whose
    energy vanishes score 0.
    """
    x = np.asarray(samples, dtype=np.complex128)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[:, None]
    sp = _spectra(x, fft_size, band_bins(fs, fft_size, band))
    out = _scan(sp, np.asarray(thetas, dtype=np.float64))
    return out[:, 0] if squeeze else out


def _mirrored(thetas) -> bool:
    n = len(thetas)
    return n % 2 == 0 and abs(thetas[n // 2] - np.pi) < 1e-9


def _grid_scores(score_fn, thetas):
    """Scores over a grid, exploiting ``project(x, t + pi) == -project(x, t)``.

    When the grid holds every ``theta + pi`` partner only the first half is
    evaluated and mirrored, so partners score identically and the
    smallest-theta tie-break is not at the mercy of rounding.
    """
    if _mirrored(thetas):
        half = score_fn(thetas[: len(thetas) // 2])
        return np.concatenate([half, half])
    return score_fn(thetas)


def _argmax_first(scores):
    best = np.max(scores)
    return int(np.flatnonzero(scores == best)[0])


def extract_pattern(
    ratio,
    theta_step: float = DEFAULT_THETA_STEP,
    fs: float = None,
    band=DEFAULT_BAND,
    fft_size: int = DEFAULT_FFT_SIZE,
) -> ExtractionResult:
    """Projection with the largest BNR over ``theta in {0, step, ..., 2 pi - step}``.

    Ties go to the smallest theta.  Raises :class:`ZeroEnergy` when every
    candidate is flat.
    """
    samples, subcarrier, ratio_fs = _window_samples(ratio)
    fs = fs or ratio_fs or 100.0
    thetas = theta_grid(theta_step)
    scores = _grid_scores(lambda th: bnr_scan(samples, th, fs, band, fft_size), thetas)
    if not np.any(scores > 0):
        raise ZeroEnergy("every projection candidate is constant")
    i = _argmax_first(scores)
    best = ProjectionCandidate(float(thetas[i]), project(samples, thetas[i]), float(scores[i]))
    return ExtractionResult(best, dict(zip(thetas.tolist(), scores.tolist())), subcarrier, "bnr")


def _safe_bnr(series, fs, band, fft_size):
    try:
        return bnr(series, fs, band, fft_size)
    except ZeroEnergy:
        return 0.0


def select_by_variance(
    ratio,
    theta_step: float = DEFAULT_THETA_STEP,
    fs: float = None,
    band=DEFAULT_BAND,
    fft_size: int = DEFAULT_FFT_SIZE,
) -> ExtractionResult:
    """Baseline: keep the projection with the largest sample variance.

    A constant input yields theta 0 with ``degenerate=True``.
    """
    samples, subcarrier, ratio_fs = _window_samples(ratio)
    fs = fs or ratio_fs or 100.0
    thetas = theta_grid(theta_step)
    x = samples - samples.mean()

    def variance(th):
        return np.var(np.cos(th)[:, None] * x.real + np.sin(th)[:, None] * x.imag, axis=1)

    variances = _grid_scores(variance, thetas)
    # rounding leaves ~eps^2 variance on constant input
    degenerate = not np.any(variances > 1e-24 * max(float(np.mean(np.abs(samples) ** 2)), ZERO_ENERGY))
    i = 0 if degenerate else _argmax_first(variances)
    series = project(samples, thetas[i])
    best = ProjectionCandidate(float(thetas[i]), series, _safe_bnr(series, fs, band, fft_size))
    return ExtractionResult(
        best, dict(zip(thetas.tolist(), variances.tolist())), subcarrier, "variance", degenerate
    )


def select_fixed(
    ratio, theta: float, fs: float = None, band=DEFAULT_BAND, fft_size: int = DEFAULT_FFT_SIZE
) -> ExtractionResult:
    """Baseline: a fixed axis (0 for the I component, pi/2 for Q)."""
    samples, subcarrier, ratio_fs = _window_samples(ratio)
    fs = fs or ratio_fs or 100.0
    series = project(samples, theta)
    score = _safe_bnr(series, fs, band, fft_size)
    best = ProjectionCandidate(float(theta), series, score)
    return ExtractionResult(best, {float(theta): score}, subcarrier, "fixed", score == 0.0)


SELECTORS = ("bnr", "variance", "i", "q")


def select(ratio, strategy: str = "bnr", **kwargs) -> ExtractionResult:
    """Dispatch to one of the selection strategies in :data:`SELECTORS`."""
    if strategy == "bnr":
        return extract_pattern(ratio, **kwargs)
    if strategy == "variance":
        return select_by_variance(ratio, **kwargs)
    if strategy in ("i", "q"):
        kwargs.pop("theta_step", None)
        return select_fixed(ratio, 0.0 if strategy == "i" else np.pi / 2, **kwargs)
    raise ValueError(f"unknown selection strategy {strategy!r}; expected one of {SELECTORS}")


def extract_all(
    window,
    theta_step: float = DEFAULT_THETA_STEP,
    fs: float = 100.0,
    band=DEFAULT_BAND,
    fft_size: int = DEFAULT_FFT_SIZE,
    subcarriers: Sequence[int] = None,
    harmonic_guard: bool = False,
):
    """:func:`extract_pattern` for every column of a ``(T, K)`` ratio block.

    Flat subcarriers are left out of the returned list.  With
    ``harmonic_guard`` each winner is passed through the same test as
    :func:`resolve_harmonic`, evaluated on the shared I/Q spectra.
    """
    x = np.asarray(window, dtype=np.complex128)
    if x.ndim == 1:
        x = x[:, None]
    ids = list(range(x.shape[1])) if subcarriers is None else list(subcarriers)
    thetas = theta_grid(theta_step)
    sl = band_bins(fs, fft_size, band)
    sp = _spectra(x, fft_size, sl)
    scores = _grid_scores(lambda th: _scan(sp, th), thetas)
    out = []
    for k, sid in enumerate(ids):
        col = scores[:, k]
        if not np.any(col > 0):
            continue
        i = _argmax_first(col)
        theta, score = float(thetas[i]), float(col[i])
        if harmonic_guard:
            swap = _harmonic_swap(sp, k, theta, score, fs, fft_size, sl, band)
            if swap is not None:
                theta, score = swap
        best = ProjectionCandidate(theta, project(x[:, k], theta), score)
        out.append(ExtractionResult(best, dict(zip(thetas.tolist(), col.tolist())), sid, "bnr"))
    return out


def _peak_bpm(series, fs, band, fft_size):
    sl = band_bins(fs, fft_size, band)
    spec = np.fft.rfft(series - series.mean(), n=fft_size)
    energy = spec.real**2 + spec.imag**2
    return (sl.start + int(np.argmax(energy[sl]))) * fs * 60.0 / fft_size


def resolve_harmonic(
    result: ExtractionResult,
    samples,
    fs: float = 100.0,
    band=DEFAULT_BAND,
    fft_size: int = DEFAULT_FFT_SIZE,
    tolerance: float = 0.1,
    min_bnr_fraction: float = 0.5,
) -> ExtractionResult:
    """Swap a second-harmonic winner for the tangent axis of the arc.

    A breathing arc of large angular extent projects onto its sagitta
    (the axis normal to the chord) as ``cos(a sin wt)``, a nearly pure tone
    at twice the breathing rate that can out-score the tangent projection on
    single-bin BNR.  When the axis orthogonal to the winner peaks at half the
    winner's frequency (within ``tolerance``, relative) and keeps at least
    ``min_bnr_fraction`` of its BNR, that orthogonal axis is returned.
    Otherwise ``result`` is returned unchanged.
    """
    x = np.asarray(samples, dtype=np.complex128)
    best = result.best
    f_best = _peak_bpm(best.series, fs, band, fft_size)
    half = f_best / 2.0
    if half < band[0] * (1 - tolerance):
        return result
    theta = (best.theta + np.pi / 2) % (2 * np.pi)
    ortho = project(x, theta)
    score = _safe_bnr(ortho, fs, band, fft_size)
    if score < min_bnr_fraction * best.bnr:
        return result
    if abs(_peak_bpm(ortho, fs, band, fft_size) - half) > tolerance * half:
        return result
    return dataclasses.replace(result, best=ProjectionCandidate(float(theta), ortho, score))


def _harmonic_swap(sp: _Spectra, k, theta, score, fs, fft_size, sl, band, tolerance=0.1, min_bnr_fraction=0.5):
    """Spectral-domain twin of :func:`resolve_harmonic` for subcarrier ``k``.

    Returns ``(theta, bnr)`` of the orthogonal axis, or None to keep the winner.
    """
    to_bpm = fs * 60.0 / fft_size
    c, s = np.cos(theta), np.sin(theta)
    bi, bq = sp.band_i[:, k], sp.band_q[:, k]
    half = (sl.start + int(np.argmax(np.abs(c * bi + s * bq) ** 2))) * to_bpm / 2.0
    if half < band[0] * (1 - tolerance):
        return None
    total = sp.total(-s, c)[k]
    if total < ZERO_ENERGY:
        return None
    in_band = np.abs(-s * bi + c * bq) ** 2
    o_score = float(in_band.max() / total)
    if o_score < min_bnr_fraction * score:
        return None
    if abs((sl.start + int(np.argmax(in_band))) * to_bpm - half) > tolerance * half:
        return None
    return float((theta + np.pi / 2) % (2 * np.pi)), o_score
