"""CSI containers and the antenna-ratio operation.

A CSI stream is stored as a complex array of shape ``(n_frames, n_antennas,
n_subcarriers)`` alongside strictly increasing timestamps.  Dividing the
reading of one antenna by another, sample by sample, removes any factor the
two share -- in particular the per-packet random phase offset of commodity
WiFi receivers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .exceptions import DenominatorUnderflow
from .validation import check_complex_series, check_csi_array, check_timestamps

# Scalar CSI value. numpy complex128 everywhere; kept as an alias for readability.
ComplexSample = complex

DEFAULT_FLOOR = 1e-9
DEFAULT_SUBCARRIERS = 30


@dataclass(frozen=True)
class CsiFrame:
    """One timestamped CSI snapshot, ``values[antenna, subcarrier]``."""

    timestamp: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 2:
            raise ValueError(f"frame values must be 2-D (antenna, subcarrier), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("frame values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamp", float(self.timestamp))

    @property
    def n_antennas(self) -> int:
        return self.values.shape[0]

    @property
    def n_subcarriers(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class CsiStream:
    """A sequence of frames held as one contiguous array."""

    timestamps: np.ndarray
    values: np.ndarray
    sample_rate: float
    carrier_frequency: float = 5.24e9

    def __post_init__(self):
        values = check_csi_array(self.values, min_antennas=1)
        timestamps = check_timestamps(self.timestamps, len(values))
        values.setflags(write=False)
        timestamps.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "timestamps", timestamps)
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")

    def __len__(self) -> int:
        return self.values.shape[0]

    def __iter__(self) -> Iterator[CsiFrame]:
        for t, v in zip(self.timestamps, self.values):
            yield CsiFrame(t, v)

    @property
    def n_antennas(self) -> int:
        return self.values.shape[1]

    @property
    def n_subcarriers(self) -> int:
        return self.values.shape[2]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate

    @classmethod
    def from_frames(
        cls, frames: Iterable[CsiFrame], sample_rate: float, carrier_frequency: float = 5.24e9
    ) -> "CsiStream":
        frames = list(frames)
        if not frames:
            raise ValueError("empty frame sequence")
        shapes = {f.values.shape for f in frames}
        if len(shapes) != 1:
            raise ValueError(f"inconsistent frame shapes: {sorted(shapes)}")
        return cls(
            timestamps=np.array([f.timestamp for f in frames]),
            values=np.stack([f.values for f in frames]),
            sample_rate=sample_rate,
            carrier_frequency=carrier_frequency,
        )

    def slice(self, start: int, stop: int) -> "CsiStream":
        return CsiStream(
            self.timestamps[start:stop], self.values[start:stop], self.sample_rate, self.carrier_frequency
        )

    def ratio(self, pair: Sequence[int] = (0, 1), floor: float = DEFAULT_FLOOR) -> np.ndarray:
        """CSI ratio for every subcarrier, shape ``(n_frames, n_subcarriers)``.

        ``pair`` holds zero-based (numerator, denominator) antenna indices.
        """
        num, den = pair
        if num == den:
            raise ValueError("numerator and denominator antennas must differ")
        return csi_ratio(self.values[:, num, :], self.values[:, den, :], floor=floor)

    def ratio_series(self, pair: Sequence[int] = (0, 1), floor: float = DEFAULT_FLOOR) -> list:
        r = self.ratio(pair, floor)
        return [CsiRatioSeries(k, r[:, k], self.sample_rate) for k in range(r.shape[1])]


@dataclass(frozen=True)
class CsiRatioSeries:
    """Complex ratio samples of a single subcarrier."""

    subcarrier: int
    samples: np.ndarray
    sample_rate: float
    start_time: float = field(default=0.0)

    def __post_init__(self):
        samples = check_complex_series(self.samples, name="samples")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def csi_ratio(numerator, denominator, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    """Element-wise quotient ``numerator / denominator``.

    Any per-sample factor common to both inputs cancels.  Raises
    :class:`DenominatorUnderflow` (with the first offending index) when a
    denominator magnitude falls below ``floor`` instead of producing Inf.
    """
    if not floor > 0:
        raise ValueError("floor must be positive")
    num = np.asarray(numerator, dtype=np.complex128)
    den = np.asarray(denominator, dtype=np.complex128)
    if num.shape != den.shape:
        raise ValueError(f"shape mismatch: {num.shape} vs {den.shape}")
    mag = np.abs(den)
    bad = ~(mag >= floor)
    if bad.any():
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise DenominatorUnderflow(idx[0] if len(idx) == 1 else idx, float(mag[idx]), floor)
    return num / den


def amplitude(series) -> np.ndarray:
    return np.abs(np.asarray(series, dtype=np.complex128))


def phase(series, return_degenerate: bool = False):
    """Unwrapped argument of ``series``.

    Zero-magnitude samples have phase 0; pass ``return_degenerate=True`` to
    also get a boolean mask marking them.
    """
    z = np.asarray(series, dtype=np.complex128)
    degenerate = z == 0
    ph = np.angle(z)
    ph[degenerate] = 0.0
    ph = np.unwrap(ph, axis=0) if ph.size else ph
    if return_degenerate:
        return ph, degenerate
    return ph
