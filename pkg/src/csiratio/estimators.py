"""scikit-learn style wrappers around the pipeline stages.

The estimators follow the usual contract: hyper-parameters are set in
``__init__`` and exposed through ``get_params``/``set_params``; state learnt
by ``fit`` ends in an underscore.  Inputs are complex arrays:

* raw CSI ``(n_frames, n_antennas, n_subcarriers)`` or a :class:`CsiStream`,
* ratio blocks ``(n_samples, n_subcarriers)``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .core import DEFAULT_FLOOR, CsiStream, csi_ratio
from .extract import (
    DEFAULT_BAND,
    DEFAULT_FFT_SIZE,
    DEFAULT_SG_ORDER,
    DEFAULT_SG_WINDOW,
    DEFAULT_THETA_STEP,
    SELECTORS,
    extract_all,
    project,
    select,
    smooth,
)
from .rate import EstimatorConfig, estimate_from_ratio, estimate_rate
from .validation import check_csi_array, check_ratio_array


def _csi_values(X):
    if isinstance(X, CsiStream):
        return X.values
    return check_csi_array(X)


class CsiRatioTransformer(TransformerMixin, BaseEstimator):
    """Raw CSI -> per-subcarrier ratio of two antennas.

    Parameters
    ----------
    antenna_pair : (int, int)
        Zero-based numerator and denominator antenna indices.
    floor : float
        Denominator magnitudes below this raise :class:`DenominatorUnderflow`.
    """

    def __init__(self, antenna_pair=(0, 1), floor=DEFAULT_FLOOR):
        self.antenna_pair = antenna_pair
        self.floor = floor

    def fit(self, X, y=None):
        values = _csi_values(X)
        num, den = self.antenna_pair
        n_ant = values.shape[1]
        if num == den or not (0 <= num < n_ant and 0 <= den < n_ant):
            raise ValueError(f"antenna_pair {self.antenna_pair} invalid for {n_ant} antennas")
        self.n_antennas_ = n_ant
        self.n_subcarriers_ = values.shape[2]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_subcarriers_")
        values = _csi_values(X)
        if values.shape[1:] != (self.n_antennas_, self.n_subcarriers_):
            raise ValueError(
                f"expected (*, {self.n_antennas_}, {self.n_subcarriers_}) CSI, got {values.shape}"
            )
        num, den = self.antenna_pair
        return csi_ratio(values[:, num, :], values[:, den, :], floor=self.floor)


class RespirationPatternExtractor(TransformerMixin, BaseEstimator):
    """Pick one projection axis per subcarrier and project onto it.

    ``fit`` smooths the ratio block and chooses theta per subcarrier with
    the given ``selection`` strategy; ``transform`` returns the real
    ``(n_samples, n_subcarriers)`` projections on the fitted axes.

    Attributes
    ----------
    theta_ : ndarray of shape (n_subcarriers,)
    bnr_ : ndarray of shape (n_subcarriers,)
        BNR of each fitted projection (0 for flat subcarriers).
    """

    def __init__(
        self,
        theta_step=DEFAULT_THETA_STEP,
        band=DEFAULT_BAND,
        fft_size=DEFAULT_FFT_SIZE,
        sample_rate=100.0,
        sg_window=DEFAULT_SG_WINDOW,
        sg_order=DEFAULT_SG_ORDER,
        selection="bnr",
        smooth=True,
    ):
        self.theta_step = theta_step
        self.band = band
        self.fft_size = fft_size
        self.sample_rate = sample_rate
        self.sg_window = sg_window
        self.sg_order = sg_order
        self.selection = selection
        self.smooth = smooth

    def _prepare(self, X):
        X = check_ratio_array(X, min_length=2)
        return smooth(X, self.sg_window, self.sg_order) if self.smooth else X

    def fit(self, X, y=None):
        if self.selection not in SELECTORS:
            raise ValueError(f"selection must be one of {SELECTORS}")
        Xs = self._prepare(X)
        k = Xs.shape[1]
        theta = np.zeros(k)
        bnr = np.zeros(k)
        kw = dict(fs=self.sample_rate, band=tuple(self.band), fft_size=self.fft_size)
        if self.selection == "bnr":
            for res in extract_all(Xs, self.theta_step, **kw):
                theta[res.subcarrier] = res.best.theta
                bnr[res.subcarrier] = res.best.bnr
        else:
            for j in range(k):
                res = select(Xs[:, j], self.selection, theta_step=self.theta_step, **kw)
                theta[j], bnr[j] = res.best.theta, res.best.bnr
        self.theta_ = theta
        self.bnr_ = bnr
        self.n_subcarriers_ = k
        return self

    def transform(self, X):
        check_is_fitted(self, "theta_")
        Xs = self._prepare(X)
        if Xs.shape[1] != self.n_subcarriers_:
            raise ValueError(f"expected {self.n_subcarriers_} subcarriers, got {Xs.shape[1]}")
        return np.column_stack([project(Xs[:, j], self.theta_[j]) for j in range(Xs.shape[1])])


class RespirationRateEstimator(BaseEstimator):
    """Sliding-window respiration rate from raw CSI or a ratio block.

    Every :class:`EstimatorConfig` field is a constructor parameter, so the
    estimator plugs into grid searches.  ``fit`` only validates; the method
    has no trainable state beyond the resolved configuration.

    ``predict`` returns one rate (bpm) per window, NaN where the window was
    non-stationary or had no qualifying peak; the full
    :class:`RateEstimate` records of the last call are kept in
    ``estimates_``.
    """

    def __init__(
        self,
        sample_rate=100.0,
        window=12.0,
        step=1.0,
        theta_step=DEFAULT_THETA_STEP,
        fft_size=DEFAULT_FFT_SIZE,
        band=DEFAULT_BAND,
        gate=0.7,
        sg_window=DEFAULT_SG_WINDOW,
        sg_order=DEFAULT_SG_ORDER,
        prominence=0.1,
        selection="bnr",
        harmonic_guard=True,
        motion_threshold=0.3,
        antenna_pair=(0, 1),
    ):
        self.sample_rate = sample_rate
        self.window = window
        self.step = step
        self.theta_step = theta_step
        self.fft_size = fft_size
        self.band = band
        self.gate = gate
        self.sg_window = sg_window
        self.sg_order = sg_order
        self.prominence = prominence
        self.selection = selection
        self.harmonic_guard = harmonic_guard
        self.motion_threshold = motion_threshold
        self.antenna_pair = antenna_pair

    def _config(self) -> EstimatorConfig:
        return EstimatorConfig(
            sample_rate=self.sample_rate,
            window=self.window,
            step=self.step,
            theta_step=self.theta_step,
            fft_size=self.fft_size,
            band=tuple(self.band),
            gate=self.gate,
            sg_window=self.sg_window,
            sg_order=self.sg_order,
            prominence=self.prominence,
            selection=self.selection,
            harmonic_guard=self.harmonic_guard,
            motion_threshold=self.motion_threshold,
            antenna_pair=tuple(self.antenna_pair),
        )

    def fit(self, X=None, y=None):
        cfg = self._config()
        cfg.lag_bounds()
        if not 0 < cfg.gate <= 1:
            raise ValueError("gate must lie in (0, 1]")
        if cfg.selection not in SELECTORS:
            raise ValueError(f"selection must be one of {SELECTORS}")
        self.config_ = cfg
        return self

    def _run(self, X):
        check_is_fitted(self, "config_")
        if isinstance(X, CsiStream):
            return estimate_rate(X, self.config_)
        arr = np.asarray(X)
        if arr.ndim == 3:
            return estimate_rate(
                CsiStream(np.arange(len(arr)) / self.sample_rate, arr, self.sample_rate), self.config_
            )
        return estimate_from_ratio(check_ratio_array(arr), self.config_)

    def predict(self, X):
        self.estimates_ = self._run(X)
        return np.array([e.rate_bpm if e.ok else np.nan for e in self.estimates_])

    def score(self, X, y, tolerance=0.5):
        """Detection rate: share of windows within ``tolerance`` bpm of ``y``.

        ``y`` is a scalar true rate or one value per window.
        """
        pred = self.predict(X)
        truth = np.broadcast_to(np.asarray(y, dtype=np.float64), pred.shape)
        with np.errstate(invalid="ignore"):
            return float(np.mean(np.abs(pred - truth) < tolerance))
