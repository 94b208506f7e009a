"""Parametric two-antenna WiFi channel simulator.

Each antenna sees a static component plus one reflection off a moving chest::

    H_n(f_k, t) = o(t) * g(t) * (Hs[n, k] + A[n, k] * exp(-j 2 pi d_n(t) f_k / c) + w)

where ``o(t)`` is a per-packet random phase offset and ``g(t)`` a per-packet
amplitude impulse, both shared by every antenna, and ``w`` is circular
Gaussian receiver noise.  ``d_2(t) = d_1(t) + dd`` with ``dd`` fixed from the
geometry at rest; :func:`synthesize` refuses scenes where that constant-offset
approximation drifts by more than ``wavelength / 100`` over a breathing cycle.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .core import CsiStream
from .exceptions import InvalidScene

SPEED_OF_LIGHT = 3.0e8  # 5.24 GHz -> 5.725 cm, the wavelength quoted for the hardware
DEFAULT_CARRIER = 5.24e9
DEFAULT_SUBCARRIER_SPACING = 625e3
RATE_RANGE = (10.0, 37.0)
CHEST_AMPLITUDE_RANGE = (0.005, 0.012)

_CHUNK = 1000
_STREAM_SCENE, _STREAM_NOISE, _STREAM_OFFSET, _STREAM_IMPULSE = range(4)


def wavelength(frequency: float = DEFAULT_CARRIER) -> float:
    return SPEED_OF_LIGHT / frequency


def reflection_path_length(los: float, perpendicular_offset: float) -> float:
    """Round-trip length via a reflector on the perpendicular bisector of the LoS."""
    if not los > 0:
        raise ValueError("los must be positive")
    if perpendicular_offset < 0:
        raise ValueError("perpendicular_offset must be non-negative")
    return 2.0 * np.hypot(los / 2.0, perpendicular_offset)


@dataclass(frozen=True)
class BreathingModel:
    """Chest motion. ``chest_amplitude`` is half the peak-to-peak displacement."""

    rate: float = 18.0
    chest_amplitude: float = 0.005
    waveform: str = "sinusoid"
    inhale_fraction: float = 0.5
    phase0: float = 0.0

    def __post_init__(self):
        if not RATE_RANGE[0] <= self.rate <= RATE_RANGE[1]:
            raise ValueError(f"breathing rate {self.rate} bpm outside {RATE_RANGE}")
        lo, hi = CHEST_AMPLITUDE_RANGE
        if not lo <= self.chest_amplitude <= hi:
            raise ValueError(f"chest_amplitude {self.chest_amplitude} m outside [{lo}, {hi}]")
        if self.waveform not in ("sinusoid", "asymmetric"):
            raise ValueError(f"unknown waveform {self.waveform!r}")
        if not 0 < self.inhale_fraction < 1:
            raise ValueError("inhale_fraction must lie in (0, 1)")

    @property
    def period(self) -> float:
        return 60.0 / self.rate


def breathing_displacement(t, model: BreathingModel):
    """Chest displacement in meters at time(s) ``t``.

    The sinusoid starts at zero for ``phase0 = 0``.  The asymmetric waveform
    rises from ``-amp`` to ``+amp`` over ``inhale_fraction`` of each period
    and falls back over the rest, with zero slope at both turning points.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    amp = model.chest_amplitude
    f = model.rate / 60.0
    if model.waveform == "sinusoid":
        return amp * np.sin(2 * np.pi * f * t + model.phase0)
    p = model.inhale_fraction
    u = np.mod(f * t + model.phase0 / (2 * np.pi), 1.0)
    rising = -amp * np.cos(np.pi * u / p)
    falling = amp * np.cos(np.pi * (u - p) / (1 - p))
    return np.where(u < p, rising, falling)


@dataclass(frozen=True)
class NoiseModel:
    complex_noise_sigma: float = 0.0
    impulse_rate: float = 0.0
    impulse_scale: float = 1.0
    phase_offset: str = "uniform_per_packet"

    def __post_init__(self):
        if self.complex_noise_sigma < 0 or self.impulse_scale < 0:
            raise ValueError("noise parameters must be non-negative")
        if not 0 <= self.impulse_rate <= 1:
            raise ValueError("impulse_rate is a per-sample probability")
        if self.phase_offset not in ("none", "uniform_per_packet"):
            raise ValueError(f"unknown phase_offset mode {self.phase_offset!r}")


@dataclass(frozen=True)
class MotionEvent:
    """Large out-and-back body movement; raised-cosine displacement profile."""

    start: float
    end: float
    displacement_amplitude: float = 0.5

    def __post_init__(self):
        if not self.end > self.start >= 0:
            raise ValueError("motion event needs 0 <= start < end")

    def displacement(self, t):
        t = np.asarray(t, dtype=np.float64)
        s = (t - self.start) / (self.end - self.start)
        active = (s >= 0) & (s < 1)
        return np.where(active, 0.5 * self.displacement_amplitude * (1 - np.cos(2 * np.pi * s)), 0.0)

    def active(self, t):
        t = np.asarray(t, dtype=np.float64)
        return (t >= self.start) & (t < self.end)


def _as_point(p):
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if p.shape == (2,):
        p = np.append(p, 0.0)
    if p.shape != (3,):
        raise ValueError(f"positions must be 2-D or 3-D points, got {p}")
    return p


@dataclass(frozen=True, eq=False)
class SimScene:
    """Geometry and channel coefficients of one simulated room.

    ``static_components`` and ``dynamic_amplitude`` have shape
    ``(n_antennas, n_subcarriers)``.  ``breathing=None`` means nobody is
    present (equivalent to zero dynamic amplitude for rate purposes).
    """

    tx_position: np.ndarray
    rx_antenna_positions: np.ndarray
    target_position: np.ndarray
    static_components: np.ndarray
    dynamic_amplitude: np.ndarray
    breathing: Optional[BreathingModel] = field(default_factory=BreathingModel)
    noise: NoiseModel = field(default_factory=NoiseModel)
    carrier_frequency: float = DEFAULT_CARRIER
    subcarrier_spacing: float = DEFAULT_SUBCARRIER_SPACING
    sample_rate: float = 100.0
    motion_axis: Optional[np.ndarray] = None

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("tx_position", _as_point(self.tx_position))
        rx = np.array([_as_point(p) for p in self.rx_antenna_positions])
        if len(rx) != 2:
            raise InvalidScene("exactly two receive antennas are modelled")
        set_("rx_antenna_positions", rx)
        set_("target_position", _as_point(self.target_position))
        hs = np.atleast_2d(np.asarray(self.static_components, dtype=np.complex128))
        a = np.atleast_2d(np.asarray(self.dynamic_amplitude, dtype=np.float64))
        if hs.shape[0] != 2 or a.shape != hs.shape:
            raise InvalidScene(
                f"static_components {hs.shape} and dynamic_amplitude {a.shape} must both be (2, K)"
            )
        if np.any(a < 0):
            raise InvalidScene("dynamic amplitudes must be non-negative")
        if not (np.all(np.isfinite(hs)) and np.all(np.isfinite(a))):
            raise InvalidScene("channel coefficients must be finite")
        set_("static_components", hs)
        set_("dynamic_amplitude", a)
        if not self.sample_rate > 0 or not self.carrier_frequency > 0:
            raise InvalidScene("sample_rate and carrier_frequency must be positive")
        if self.motion_axis is None:
            mid = 0.5 * (self.tx_position + rx[0])
            axis = self.target_position - mid
            if np.linalg.norm(axis) < 1e-12:
                axis = np.array([0.0, 1.0, 0.0])
        else:
            axis = _as_point(self.motion_axis)
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise InvalidScene("motion_axis must be non-zero")
        set_("motion_axis", axis / norm)
        spacing = np.linalg.norm(rx[1] - rx[0])
        distance = min(np.linalg.norm(self.target_position - p) for p in rx)
        if spacing >= distance:
            raise InvalidScene("antenna spacing must be much smaller than the target distance")

    @property
    def n_subcarriers(self) -> int:
        return self.static_components.shape[1]

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def subcarrier_frequencies(self) -> np.ndarray:
        k = np.arange(self.n_subcarriers) - (self.n_subcarriers - 1) / 2.0
        return self.carrier_frequency + k * self.subcarrier_spacing

    @property
    def has_target(self) -> bool:
        return self.breathing is not None and bool(np.any(self.dynamic_amplitude > 0))

    def path_lengths(self, displacement) -> np.ndarray:
        """Exact reflection path per antenna, shape ``(len(displacement), 2)``."""
        disp = np.atleast_1d(np.asarray(displacement, dtype=np.float64))
        p = self.target_position + disp[:, None] * self.motion_axis
        leg_tx = np.linalg.norm(p - self.tx_position, axis=1)
        legs_rx = np.linalg.norm(p[:, None, :] - self.rx_antenna_positions[None], axis=2)
        return leg_tx[:, None] + legs_rx

    @property
    def delta_d(self) -> float:
        d = self.path_lengths([0.0])[0]
        return float(d[1] - d[0])

    def check_delta_d(self, displacement_range) -> float:
        """Max drift of the exact antenna path difference from :attr:`delta_d`.

        Raises :class:`InvalidScene` beyond ``wavelength / 100``.
        """
        lo, hi = displacement_range
        probe = np.linspace(lo, hi, 257)
        d = self.path_lengths(probe)
        drift = float(np.max(np.abs((d[:, 1] - d[:, 0]) - self.delta_d)))
        if drift > self.wavelength / 100:
            raise InvalidScene(
                f"antenna path difference drifts {drift:.2e} m (> lambda/100) over the motion range"
            )
        return drift

    def with_noise(self, noise: NoiseModel) -> "SimScene":
        return replace(self, noise=noise)

    def with_breathing(self, breathing: Optional[BreathingModel]) -> "SimScene":
        return replace(self, breathing=breathing)


@dataclass
class GroundTruth:
    sample_rate: float
    rate_bpm: Optional[float]
    has_target: bool
    displacement: np.ndarray
    path_length: np.ndarray
    stationary: np.ndarray
    motion_events: list
    noise_sigma: float
    snr_db: Optional[float]

    @property
    def duration(self) -> float:
        return len(self.displacement) / self.sample_rate

    def window_stationary(self, window: float) -> np.ndarray:
        """Per-window labels matching :func:`csiratio.rate.motion_gate` windows."""
        n = max(1, int(round(window * self.sample_rate)))
        starts = range(0, len(self.stationary), n)
        return np.array([bool(np.all(self.stationary[s : s + n])) for s in starts])

    def to_dict(self) -> dict:
        return {
            "sample_rate": self.sample_rate,
            "duration": self.duration,
            "has_target": self.has_target,
            "target": "present" if self.has_target else "no target",
            "rate_bpm": self.rate_bpm,
            "noise_sigma": self.noise_sigma,
            "snr_db": self.snr_db,
            "motion_events": [asdict(e) for e in self.motion_events],
            "displacement": self.displacement.tolist(),
            "stationary": self.stationary.astype(int).tolist(),
        }


def snr_db(scene: SimScene) -> Optional[float]:
    sigma = scene.noise.complex_noise_sigma
    a = float(np.mean(scene.dynamic_amplitude))
    if sigma <= 0 or a <= 0:
        return None
    return 20 * np.log10(a / sigma)


def synthesize_displacement(
    scene: SimScene,
    displacement,
    seed: int = 0,
    start_time: float = 0.0,
    check_range: Optional[Sequence[float]] = None,
) -> CsiStream:
    """CSI stream for an explicit target displacement trajectory (meters).

    ``check_range`` bounds the displacement over which the constant
    antenna-offset assumption is validated; defaults to the trajectory's range.
    """
    disp = np.asarray(displacement, dtype=np.float64)
    if disp.ndim != 1 or len(disp) == 0:
        raise ValueError("displacement must be a non-empty 1-D array")
    if check_range is None:
        check_range = (float(disp.min()), float(disp.max()))
    scene.check_delta_d(check_range)

    n_frames = len(disp)
    fs = scene.sample_rate
    d1 = scene.path_lengths(disp)[:, 0]
    d = np.stack([d1, d1 + scene.delta_d], axis=1)  # (T, 2)
    k_wave = scene.subcarrier_frequencies / SPEED_OF_LIGHT  # 1 / lambda_k
    dynamic = np.exp(-2j * np.pi * d[:, :, None] * k_wave[None, None, :])
    values = scene.static_components[None] + scene.dynamic_amplitude[None] * dynamic

    _apply_noise(values, scene.noise, seed)
    timestamps = start_time + np.arange(n_frames) / fs
    return CsiStream(timestamps, values, fs, scene.carrier_frequency)


def _apply_noise(values, noise: NoiseModel, seed: int):
    """In-place: add receiver noise, then shared impulse and phase-offset factors.

    Random draws come in fixed chunks of frames, each with its own generator
    keyed by ``(seed, stream, chunk)``, so every component is reproducible
    independently of the others.
    """
    n_frames, n_ant, n_sub = values.shape
    for c, lo in enumerate(range(0, n_frames, _CHUNK)):
        hi = min(lo + _CHUNK, n_frames)
        block = values[lo:hi]
        if noise.complex_noise_sigma > 0:
            rng = np.random.default_rng([seed, _STREAM_NOISE, c])
            w = rng.standard_normal((hi - lo, n_ant, n_sub, 2))
            block += (noise.complex_noise_sigma / np.sqrt(2)) * (w[..., 0] + 1j * w[..., 1])
        if noise.impulse_rate > 0:
            rng = np.random.default_rng([seed, _STREAM_IMPULSE, c])
            hit = rng.random(hi - lo) < noise.impulse_rate
            block *= np.where(hit, noise.impulse_scale, 1.0)[:, None, None]
        if noise.phase_offset == "uniform_per_packet":
            rng = np.random.default_rng([seed, _STREAM_OFFSET, c])
            theta = rng.uniform(0.0, 2 * np.pi, hi - lo)
            block *= np.exp(-1j * theta)[:, None, None]


def synthesize(
    scene: SimScene, duration: float, motion_events: Sequence[MotionEvent] = (), seed: int = 0
):
    """Simulate ``duration`` seconds of CSI.

    Returns ``(CsiStream, GroundTruth)``.  Motion events are added on top of
    the breathing displacement along the same axis.
    """
    if not duration > 0:
        raise ValueError("duration must be positive")
    fs = scene.sample_rate
    n_frames = int(round(duration * fs))
    t = np.arange(n_frames) / fs
    events = sorted(motion_events, key=lambda e: e.start)
    for a, b in zip(events, events[1:]):
        if b.start < a.end:
            raise InvalidScene("motion events overlap")
    if events and events[-1].end > duration + 1e-9:
        raise InvalidScene("motion event extends past the stream")

    if scene.breathing is not None:
        disp = breathing_displacement(t, scene.breathing)
        amp = scene.breathing.chest_amplitude
    else:
        disp = np.zeros(n_frames)
        amp = 0.0
    stationary = np.ones(n_frames, dtype=bool)
    for e in events:
        disp = disp + e.displacement(t)
        stationary &= ~e.active(t)

    stream = synthesize_displacement(scene, disp, seed=seed, check_range=(-amp, amp))
    truth = GroundTruth(
        sample_rate=fs,
        rate_bpm=scene.breathing.rate if scene.has_target else None,
        has_target=scene.has_target,
        displacement=disp,
        path_length=scene.path_lengths(disp)[:, 0],
        stationary=stationary,
        motion_events=list(events),
        noise_sigma=scene.noise.complex_noise_sigma,
        snr_db=snr_db(scene),
    )
    return stream, truth


def make_scene(
    n_subcarriers: int = 30,
    los: float = 3.0,
    target_offset: float = 3.0,
    antenna_spacing: Optional[float] = None,
    static_magnitude=(0.5, 1.5),
    dynamic_amplitude=(0.05, 0.2),
    static_attenuation: float = 1.0,
    breathing: Optional[BreathingModel] = None,
    noise: Optional[NoiseModel] = None,
    snr_db: Optional[float] = None,
    carrier_frequency: float = DEFAULT_CARRIER,
    subcarrier_spacing: float = DEFAULT_SUBCARRIER_SPACING,
    sample_rate: float = 100.0,
    seed: int = 0,
) -> SimScene:
    """Bisector geometry with per-subcarrier channel diversity.

    Tx sits at ``(-los/2, 0)``, antenna 1 at ``(los/2, 0)`` and antenna 2 one
    ``antenna_spacing`` (default half a wavelength) further along the LoS
    axis; the target is ``target_offset`` meters off the LoS midpoint.
    Static magnitudes, dynamic amplitudes and all phases are drawn per
    antenna and subcarrier from the given ranges, so some subcarriers end up
    weak.  ``static_attenuation`` scales every static component (a crude,
    uncalibrated NLoS knob).  When ``snr_db`` is given the noise sigma is set
    so that ``20 log10(mean(A) / sigma) == snr_db``.
    """
    if breathing is None:
        breathing = BreathingModel()
    noise = noise if noise is not None else NoiseModel()
    lam = SPEED_OF_LIGHT / carrier_frequency
    spacing = lam / 2 if antenna_spacing is None else antenna_spacing
    rng = np.random.default_rng([seed, _STREAM_SCENE])
    shape = (2, n_subcarriers)
    hs = rng.uniform(*static_magnitude, shape) * np.exp(2j * np.pi * rng.random(shape))
    a = rng.uniform(*dynamic_amplitude, shape)
    hs = hs * static_attenuation
    if snr_db is not None:
        ref = float(np.mean(a))
        if ref <= 0:
            raise InvalidScene("snr_db needs a non-zero dynamic amplitude")
        noise = NoiseModel(ref / 10 ** (snr_db / 20), noise.impulse_rate, noise.impulse_scale, noise.phase_offset)
    return SimScene(
        tx_position=(-los / 2, 0.0, 0.0),
        rx_antenna_positions=[(los / 2, 0.0, 0.0), (los / 2 + spacing, 0.0, 0.0)],
        target_position=(0.0, target_offset, 0.0),
        static_components=hs,
        dynamic_amplitude=a,
        breathing=breathing if np.any(a > 0) else None,
        noise=noise,
        carrier_frequency=carrier_frequency,
        subcarrier_spacing=subcarrier_spacing,
        sample_rate=sample_rate,
    )
