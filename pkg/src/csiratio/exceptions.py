"""Exception hierarchy shared by every stage of the pipeline."""


class CsiRatioError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class DenominatorUnderflow(CsiRatioError, ValueError):
    code = "denominator_underflow"

    def __init__(self, index, magnitude, floor):
        self.index = index
        self.magnitude = magnitude
        self.floor = floor
        super().__init__(
            f"|denominator| = {magnitude:.3g} below floor {floor:.3g} at sample {index}"
        )


class InvalidScene(CsiRatioError, ValueError):
    code = "invalid_scene"


class PoleHit(CsiRatioError, ZeroDivisionError):
    code = "pole_hit"


class DegenerateInput(CsiRatioError, ValueError):
    code = "degenerate_input"


class OffCircle(CsiRatioError, ValueError):
    code = "off_circle"


class BadFilterParams(CsiRatioError, ValueError):
    code = "bad_filter_params"


class ZeroEnergy(CsiRatioError, ValueError):
    code = "zero_energy"


class ZeroVariance(CsiRatioError, ValueError):
    code = "zero_variance"


class NoPeak(CsiRatioError):
    code = "no_peak"


class NonStationary(CsiRatioError):
    code = "non_stationary"


class RecordFormatError(CsiRatioError, ValueError):
    """Malformed CSI record file; ``line`` is 1-based."""

    code = "malformed_record"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
