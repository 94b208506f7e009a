"""Respiration sensing from the ratio of CSI between two WiFi antennas.

The package covers the whole chain on synthetic data: a multipath channel
simulator, the antenna ratio and its circle geometry, projection selection by
breathing-to-noise ratio, and autocorrelation-based rate estimation.
"""

from .core import CsiFrame, CsiRatioSeries, CsiStream, amplitude, csi_ratio, phase
from .estimators import CsiRatioTransformer, RespirationPatternExtractor, RespirationRateEstimator
from .exceptions import (
    BadFilterParams,
    CsiRatioError,
    DegenerateInput,
    DenominatorUnderflow,
    InvalidScene,
    NonStationary,
    NoPeak,
    OffCircle,
    PoleHit,
    RecordFormatError,
    ZeroEnergy,
    ZeroVariance,
)
from .extract import bnr, extract_pattern, select_by_variance, smooth
from .mobius import MobiusCoefficients, arc_radian, fit_circle, mobius_map, rotation_orientation
from .rate import EstimatorConfig, RateEstimate, autocorrelation, estimate_rate, first_peak_lag, motion_gate
from .simulate import BreathingModel, GroundTruth, MotionEvent, NoiseModel, SimScene, make_scene, synthesize

__version__ = "0.1.0"

__all__ = [
    "BadFilterParams",
    "BreathingModel",
    "CsiFrame",
    "CsiRatioError",
    "CsiRatioSeries",
    "CsiRatioTransformer",
    "CsiStream",
    "DegenerateInput",
    "DenominatorUnderflow",
    "EstimatorConfig",
    "GroundTruth",
    "InvalidScene",
    "MobiusCoefficients",
    "MotionEvent",
    "NoiseModel",
    "NonStationary",
    "NoPeak",
    "OffCircle",
    "PoleHit",
    "RateEstimate",
    "RecordFormatError",
    "RespirationPatternExtractor",
    "RespirationRateEstimator",
    "SimScene",
    "ZeroEnergy",
    "ZeroVariance",
    "amplitude",
    "arc_radian",
    "autocorrelation",
    "bnr",
    "csi_ratio",
    "estimate_rate",
    "extract_pattern",
    "first_peak_lag",
    "fit_circle",
    "make_scene",
    "mobius_map",
    "motion_gate",
    "phase",
    "rotation_orientation",
    "select_by_variance",
    "smooth",
    "synthesize",
]
