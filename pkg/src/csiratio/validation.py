"""Input validation helpers.

scikit-learn's ``check_array`` rejects complex input, so CSI arrays get
their own checks here.  Each helper returns a validated float64/complex128
copy-free view where possible.
"""

import numpy as np


def check_complex_series(x, name="series", min_length=1):
    x = np.asarray(x)
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    if len(x) < min_length:
        raise ValueError(f"{name} needs at least {min_length} samples, got {len(x)}")
    x = x.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains NaN or Inf")
    return x


def check_real_series(x, name="series", min_length=1):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        raise TypeError(f"{name} must be real-valued")
    if x.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {x.shape}")
    if len(x) < min_length:
        raise ValueError(f"{name} needs at least {min_length} samples, got {len(x)}")
    x = x.astype(np.float64, copy=False)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains NaN or Inf")
    return x


def check_ratio_array(X, name="X", min_length=1):
    """Validate a ratio block of shape ``(n_samples, n_subcarriers)``.

    1-D input is treated as a single subcarrier.
    """
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D (samples, subcarriers), got shape {X.shape}")
    if X.shape[0] < min_length:
        raise ValueError(f"{name} needs at least {min_length} samples, got {X.shape[0]}")
    if X.shape[1] < 1:
        raise ValueError(f"{name} has no subcarriers")
    X = X.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or Inf")
    return X


def check_csi_array(X, min_antennas=2, name="X"):
    """Validate raw CSI of shape ``(n_frames, n_antennas, n_subcarriers)``."""
    X = np.asarray(X)
    if X.ndim != 3:
        raise ValueError(f"{name} must be 3-D (frames, antennas, subcarriers), got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[2] < 1:
        raise ValueError(f"{name} is empty: shape {X.shape}")
    if X.shape[1] < min_antennas:
        raise ValueError(f"{name} needs at least {min_antennas} antennas, got {X.shape[1]}")
    X = X.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or Inf")
    return X


def check_timestamps(t, n):
    t = np.asarray(t, dtype=np.float64)
    if t.shape != (n,):
        raise ValueError(f"expected {n} timestamps, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("timestamps must be finite")
    if n > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("timestamps must be strictly increasing")
    return t


def check_band(band, sample_rate):
    lo, hi = (float(b) for b in band)
    nyquist_bpm = sample_rate * 30.0
    if not (0 < lo < hi < nyquist_bpm):
        raise ValueError(f"band {band} bpm must satisfy 0 < min < max < {nyquist_bpm:g}")
    return lo, hi
