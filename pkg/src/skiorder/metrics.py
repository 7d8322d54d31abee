"""Knee metrics of a singular-value curve and random-matrix noise bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from skiorder.errors import GeometryError, InvalidShapeError, KneeUndefinedError
from skiorder.svknee import KneeGeometry, SingularCurve, detect_knee, singular_curve

METRIC_KEYS = (
    "normalized_sv_at_knee",
    "fraction_outside_bounds",
    "knee_outside_bounds",
    "normalized_knee_position",
    "area_after_knee",
    "knee_angle_deg",
    "curvature",
    "knee_vector_ratio",
    "kappa",
    "bound_lower",
    "bound_upper",
    "knee_index",
    "rank",
)


@dataclass(frozen=True)
class NoiseBounds:
    """Marcenko-Pastur support edges ``1 -+ sqrt(kappa)`` for unit-scaled noise singular values."""

    lower: float
    upper: float
    kappa: float

    def contains(self, value: float) -> bool:
        return self.lower < value < self.upper


def noise_bounds(m_rows: int, n_cols: int) -> NoiseBounds:
    if m_rows < 1 or n_cols < 1:
        raise InvalidShapeError(f"noise bounds need positive dimensions, got {m_rows}x{n_cols}")
    kappa = min(m_rows, n_cols) / max(m_rows, n_cols)
    root = math.sqrt(kappa)
    return NoiseBounds(lower=1.0 - root, upper=1.0 + root, kappa=kappa)


def asymptotic_spiked_sv(x: float, kappa: float) -> float:
    """Large-n limit of the top singular value of ``x u v^T + Z/sqrt(n)``.

    Below the detection threshold ``kappa**0.25`` the spike is swallowed by
    the noise bulk and the limit is the bulk edge ``1 + sqrt(kappa)``.
    """
    if x < 0:
        raise ValueError("spike strength must be non-negative")
    if x > kappa**0.25:
        return math.sqrt((x + 1.0 / x) * (x + kappa / x))
    return 1.0 + math.sqrt(kappa)


def normalized_sv_at_knee(curve: SingularCurve, knee: KneeGeometry) -> float:
    s = curve.ranked
    return float(s[knee.index - 1] / s[0])


def fraction_outside_bounds(curve: SingularCurve, bounds: NoiseBounds) -> float:
    s = curve.ranked
    outside = (s <= bounds.lower) | (s >= bounds.upper)
    return float(np.count_nonzero(outside) / len(s))


def knee_outside_bounds(curve: SingularCurve, knee: KneeGeometry, bounds: NoiseBounds) -> int:
    return int(not bounds.contains(float(curve.ranked[knee.index - 1])))


def normalized_knee_position(curve: SingularCurve, knee: KneeGeometry) -> float:
    return knee.index / curve.rank


def area_after_knee(curve: SingularCurve, knee: KneeGeometry) -> float:
    s = curve.ranked
    r = curve.rank
    idx = np.arange(knee.index, r + 1)
    y = s[idx - 1] / s[0]
    x = idx / r
    return float(np.trapezoid(y, x))


def _angle_rad(knee: KneeGeometry) -> float:
    v1, v2 = knee.v1, knee.v2
    if np.hypot(*v1) == 0 or np.hypot(*v2) == 0:
        raise GeometryError("knee vector has zero length")
    cross = v1[0] * v2[1] - v1[1] * v2[0]
    dot = v1[0] * v2[0] + v1[1] * v2[1]
    return math.atan2(abs(cross), dot)


def knee_angle(knee: KneeGeometry) -> float:
    """Angle in degrees between the knee-anchored vectors to P1 and P3."""
    return math.degrees(_angle_rad(knee))


def knee_curvature(knee: KneeGeometry) -> float:
    # sin(theta)/|v2 - v1| as published; half the textbook Menger curvature
    chord = np.hypot(*(knee.v2 - knee.v1))
    return math.sin(_angle_rad(knee)) / chord


def knee_vector_ratio(knee: KneeGeometry) -> float:
    return float(np.hypot(*knee.v2) / np.hypot(*knee.v1))


@dataclass(frozen=True)
class MetricsReport:
    """The eight knee metrics for one matrix.

    When the knee is undefined (rank < 3) ``knee`` is None and only the
    curve-level fields (fraction outside bounds, bounds, rank) are set.
    """

    normalized_sv_at_knee: float | None
    fraction_outside_bounds: float
    knee_outside_bounds: int | None
    normalized_knee_position: float | None
    area_after_knee: float | None
    knee_angle_deg: float | None
    curvature: float | None
    knee_vector_ratio: float | None
    bounds: NoiseBounds
    rank: int
    knee: KneeGeometry | None = None

    @property
    def defined(self) -> bool:
        return self.knee is not None

    def to_dict(self) -> dict:
        out = {
            "normalized_sv_at_knee": self.normalized_sv_at_knee,
            "fraction_outside_bounds": self.fraction_outside_bounds,
            "knee_outside_bounds": self.knee_outside_bounds,
            "normalized_knee_position": self.normalized_knee_position,
            "area_after_knee": self.area_after_knee,
            "knee_angle_deg": self.knee_angle_deg,
            "curvature": self.curvature,
            "knee_vector_ratio": self.knee_vector_ratio,
            "kappa": self.bounds.kappa,
            "bound_lower": self.bounds.lower,
            "bound_upper": self.bounds.upper,
            "knee_index": self.knee.index if self.knee else None,
            "rank": self.rank,
        }
        if not self.defined:
            out["knee"] = "undefined"
        return out


def metrics_from_curve(curve: SingularCurve) -> MetricsReport:
    bounds = noise_bounds(curve.m_rows, curve.n_cols)
    frac = fraction_outside_bounds(curve, bounds)
    try:
        knee = detect_knee(curve)
    except KneeUndefinedError:
        return MetricsReport(None, frac, None, None, None, None, None, None, bounds=bounds, rank=curve.rank)
    return MetricsReport(
        normalized_sv_at_knee=normalized_sv_at_knee(curve, knee),
        fraction_outside_bounds=frac,
        knee_outside_bounds=knee_outside_bounds(curve, knee, bounds),
        normalized_knee_position=normalized_knee_position(curve, knee),
        area_after_knee=area_after_knee(curve, knee),
        knee_angle_deg=knee_angle(knee),
        curvature=knee_curvature(knee),
        knee_vector_ratio=knee_vector_ratio(knee),
        bounds=bounds,
        rank=curve.rank,
        knee=knee,
    )


def compute_all(X) -> MetricsReport:
    """Singular curve, knee and all metrics for an already preprocessed matrix."""
    return metrics_from_curve(singular_curve(X))
