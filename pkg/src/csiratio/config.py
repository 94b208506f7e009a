"""Run configuration shared by the command-line tools.

A config file is JSON or YAML with up to three sections::

    simulation: {duration: 60, rate: 18.2, snr_db: 10, ...}
    estimator:  {window: 12, gate: 0.7, band: [10, 37], ...}
    verify:     {n_random: 200, ...}

Missing keys take the defaults below; unknown keys are rejected so typos do
not pass silently.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import yaml

from .rate import EstimatorConfig
from .simulate import (
    DEFAULT_CARRIER,
    DEFAULT_SUBCARRIER_SPACING,
    SPEED_OF_LIGHT,
    BreathingModel,
    MotionEvent,
    NoiseModel,
    make_scene,
)


@dataclass(frozen=True)
class SimulationConfig:
    duration: float = 60.0
    sample_rate: float = 100.0
    n_subcarriers: int = 30
    carrier_frequency: float = DEFAULT_CARRIER
    subcarrier_spacing: float = DEFAULT_SUBCARRIER_SPACING
    # geometry: LoS length and the target's offset from its midpoint
    los: float = 3.0
    target_offset: float = 3.0
    antenna_spacing: Optional[float] = None  # None = half a wavelength
    rate: float = 18.2
    chest_amplitude: float = 0.005
    waveform: str = "sinusoid"
    inhale_fraction: float = 0.5
    static_magnitude: Tuple[float, float] = (0.5, 1.5)
    dynamic_amplitude: Tuple[float, float] = (0.05, 0.2)
    static_attenuation: float = 1.0
    snr_db: Optional[float] = 10.0
    impulse_rate: float = 0.0
    impulse_scale: float = 1.0
    phase_offset: str = "uniform_per_packet"
    motion_events: List[Tuple[float, float, float]] = field(default_factory=list)

    def breathing(self) -> BreathingModel:
        return BreathingModel(
            rate=self.rate,
            chest_amplitude=self.chest_amplitude,
            waveform=self.waveform,
            inhale_fraction=self.inhale_fraction,
        )

    def events(self) -> List[MotionEvent]:
        return [MotionEvent(*e) for e in self.motion_events]

    def scene(self, seed: int = 0):
        spacing = self.antenna_spacing
        if spacing is None:
            spacing = SPEED_OF_LIGHT / self.carrier_frequency / 2
        return make_scene(
            n_subcarriers=self.n_subcarriers,
            los=self.los,
            target_offset=self.target_offset,
            antenna_spacing=spacing,
            static_magnitude=self.static_magnitude,
            dynamic_amplitude=self.dynamic_amplitude,
            static_attenuation=self.static_attenuation,
            breathing=self.breathing(),
            noise=NoiseModel(
                impulse_rate=self.impulse_rate,
                impulse_scale=self.impulse_scale,
                phase_offset=self.phase_offset,
            ),
            snr_db=self.snr_db,
            carrier_frequency=self.carrier_frequency,
            subcarrier_spacing=self.subcarrier_spacing,
            sample_rate=self.sample_rate,
            seed=seed,
        )


@dataclass(frozen=True)
class VerifyConfig:
    """Scenes for the circle/orientation/arc checks.

    Default geometry: 4 m line of sight with the target starting 2.55 m from
    its midpoint, where a 3.6 cm move changes the path by one wavelength.
    """

    los: float = 4.0
    start_offset: float = 2.55
    carrier_frequency: float = DEFAULT_CARRIER
    n_samples: int = 400
    # |H_s| / A for the LoS-dominant and attenuated-LoS scenes
    strong_ratio: float = 50.0
    weak_ratio: float = 0.2
    n_random: int = 200
    boundary_band: float = 0.05
    circle_tolerance: float = 1e-6
    full_arc_tolerance: float = 0.02
    partial_arc_tolerance: float = 0.10


@dataclass(frozen=True)
class RunConfig:
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    verify: VerifyConfig = field(default_factory=VerifyConfig)

    def __post_init__(self):
        if self.estimator.sample_rate != self.simulation.sample_rate:
            raise ValueError(
                f"estimator sample_rate {self.estimator.sample_rate} differs from "
                f"simulation sample_rate {self.simulation.sample_rate}"
            )

    @classmethod
    def from_dict(cls, data: Optional[dict]) -> "RunConfig":
        data = dict(data or {})
        unknown = set(data) - {"simulation", "estimator", "verify"}
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        sim = _build(SimulationConfig, data.get("simulation"))
        est = data.get("estimator") or {}
        if "sample_rate" not in est:
            est = {**est, "sample_rate": sim.sample_rate}
        return cls(sim, _build(EstimatorConfig, est), _build(VerifyConfig, data.get("verify")))

    @classmethod
    def load(cls, path) -> "RunConfig":
        text = Path(path).read_text()
        if str(path).endswith((".yaml", ".yml")):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
        if data is not None and not isinstance(data, dict):
            raise ValueError(f"{path}: config must be a mapping")
        return cls.from_dict(data)

    def with_overrides(self, theta_step=None, gate=None, band=None) -> "RunConfig":
        changes = {}
        if theta_step is not None:
            changes["theta_step"] = float(theta_step)
        if gate is not None:
            changes["gate"] = float(gate)
        if band is not None:
            changes["band"] = tuple(float(b) for b in band)
        if not changes:
            return self
        return replace(self, estimator=_build(EstimatorConfig, {**asdict(self.estimator), **changes}))

    def to_dict(self) -> dict:
        return {
            "simulation": asdict(self.simulation),
            "estimator": asdict(self.estimator),
            "verify": asdict(self.verify),
        }


def _build(cls, values: Optional[dict]):
    values = dict(values or {})
    known = {f.name: f for f in fields(cls)}
    unknown = set(values) - set(known)
    if unknown:
        raise ValueError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    for name, value in values.items():
        # JSON/YAML have no tuples
        if isinstance(value, list) and name != "motion_events":
            values[name] = tuple(value)
        elif name == "motion_events":
            values[name] = [tuple(float(v) for v in e) for e in value]
    cfg = cls(**values)
    if cls is EstimatorConfig:
        _check_estimator(cfg)
    return cfg


def _check_estimator(cfg: EstimatorConfig):
    if not 0 < cfg.gate <= 1:
        raise ValueError("gate must lie in (0, 1]")
    if not 0 < cfg.theta_step <= np.pi:
        raise ValueError("theta_step must lie in (0, pi]")
    if len(cfg.band) != 2:
        raise ValueError("band must be [min_bpm, max_bpm]")
    cfg.lag_bounds()  # validates the band against the sample rate
    if cfg.window_samples > cfg.fft_size:
        raise ValueError("window is longer than fft_size")
    if cfg.selection not in ("bnr", "variance", "i", "q"):
        raise ValueError(f"unknown selection {cfg.selection!r}")
