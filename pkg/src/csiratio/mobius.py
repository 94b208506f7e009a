"""Complex-plane geometry of the CSI ratio.

With ``Z = exp(-j 2 pi d_1(t) / lambda)`` the two-antenna ratio is the Moebius
map ``(A Z + B) / (C Z + D)`` with ``A = A_1``, ``B = Hs_1``,
``C = A_2 exp(-j 2 pi dd / lambda)`` and ``D = Hs_2``.  The tools here check
what that implies: circles stay circles, orientation flips exactly when the
translated circle ``Z + D/C`` encloses the origin, and the swept angle tracks
the path-length change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateInput, OffCircle, PoleHit

POLE_TOLERANCE = 1e-12
ORIENTATION_TOLERANCE = 1e-6
CLOCKWISE = "clockwise"
COUNTERCLOCKWISE = "counterclockwise"
INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class MobiusCoefficients:
    A: complex
    B: complex
    C: complex
    D: complex

    def __post_init__(self):
        for name in "ABCD":
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.determinant == 0:
            raise DegenerateInput("BC - AD must be non-zero")

    @property
    def determinant(self) -> complex:
        return self.B * self.C - self.A * self.D

    @classmethod
    def from_channel(cls, static, dynamic_amplitude, delta_d, wavelength):
        """Coefficients for antenna pair (1, 2) given per-antenna ``Hs`` and ``A``."""
        hs1, hs2 = static
        a1, a2 = dynamic_amplitude
        return cls(a1, hs1, a2 * np.exp(-2j * np.pi * delta_d / wavelength), hs2)


def mobius_map(coeffs: MobiusCoefficients, z):
    z = np.asarray(z, dtype=np.complex128)
    den = coeffs.C * z + coeffs.D
    if np.any(np.abs(den) < POLE_TOLERANCE):
        raise PoleHit("C z + D vanishes")
    return (coeffs.A * z + coeffs.B) / den


def mobius_map_decomposed(coeffs: MobiusCoefficients, z):
    """Same map written as translate, invert, scale-rotate, translate.

    Only valid for ``C != 0``.
    """
    if coeffs.C == 0:
        raise DegenerateInput("decomposition needs C != 0")
    z = np.asarray(z, dtype=np.complex128)
    shifted = z + coeffs.D / coeffs.C
    if np.any(np.abs(coeffs.C * shifted) < POLE_TOLERANCE):
        raise PoleHit("C z + D vanishes")
    return coeffs.determinant / coeffs.C**2 / shifted + coeffs.A / coeffs.C


@dataclass(frozen=True)
class FittedCircle:
    center: complex
    radius: float
    rms_residual: float

    @property
    def relative_residual(self) -> float:
        return self.rms_residual / self.radius


def _check_points(points, min_points=3):
    p = np.asarray(points, dtype=np.complex128).reshape(-1)
    if len(p) < min_points:
        raise DegenerateInput(f"need at least {min_points} points, got {len(p)}")
    if not np.all(np.isfinite(p)):
        raise DegenerateInput("points must be finite")
    return p


def fit_circle(points, collinear_tol: float = 1e-9) -> FittedCircle:
    """Algebraic (Kasa) least-squares circle through complex ``points``.

    Solves ``x^2 + y^2 + a x + b y + c = 0`` on centered, scaled coordinates.
    Raises :class:`DegenerateInput` for fewer than three points or points
    that are collinear to within ``collinear_tol`` (relative spread).
    """
    p = _check_points(points)
    origin = p.mean()
    q = p - origin
    scale = np.max(np.abs(q))
    if scale == 0:
        raise DegenerateInput("all points coincide")
    q = q / scale
    sv = np.linalg.svd(np.column_stack([q.real, q.imag]), compute_uv=False)
    if sv[1] <= collinear_tol * sv[0]:
        raise DegenerateInput("points are collinear")
    x, y = q.real, q.imag
    design = np.column_stack([x, y, np.ones_like(x)])
    rhs = -(x * x + y * y)
    (a, b, c), *_ = np.linalg.lstsq(design, rhs, rcond=None)
    center = complex(-a / 2, -b / 2)
    r2 = center.real**2 + center.imag**2 - c
    if not r2 > 0:
        raise DegenerateInput("no real circle fits these points")
    radius = np.sqrt(r2)
    if radius > 1e9:
        raise DegenerateInput("points are collinear")
    resid = np.abs(q - center) - radius
    return FittedCircle(
        center=origin + scale * center,
        radius=float(scale * radius),
        rms_residual=float(scale * np.sqrt(np.mean(resid**2))),
    )


def _signed_area(points, center):
    v = np.asarray(points) - center
    cross = v[:-1].real * v[1:].imag - v[:-1].imag * v[1:].real
    return 0.5 * float(np.sum(cross))


def rotation_orientation(points, tol: float = ORIENTATION_TOLERANCE) -> str:
    """Traversal sense of ``points`` around their fitted circle.

    Uses the signed area swept about the fitted center; below
    ``tol * radius**2`` the answer is indeterminate.
    """
    p = _check_points(points)
    circle = fit_circle(p)
    area = _signed_area(p, circle.center)
    if abs(area) < tol * circle.radius**2:
        return INDETERMINATE
    return COUNTERCLOCKWISE if area > 0 else CLOCKWISE


def arc_radian(points, circle: FittedCircle = None, max_residual: float = 0.1) -> float:
    """Net angle swept around ``circle.center``; clockwise is negative.

    Every point must lie within ``max_residual * radius`` of the circle,
    otherwise :class:`OffCircle` is raised.
    """
    p = _check_points(points, min_points=2)
    if circle is None:
        circle = fit_circle(p)
    v = p - circle.center
    off = np.abs(np.abs(v) - circle.radius)
    if np.any(off > max_residual * circle.radius):
        worst = int(np.argmax(off))
        raise OffCircle(f"point {worst} is {off[worst] / circle.radius:.1%} of the radius off the circle")
    ang = np.unwrap(np.angle(v))
    return float(ang[-1] - ang[0])
