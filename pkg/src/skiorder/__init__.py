"""Singular-value knee analysis of multi-agent trajectories and cellular automata."""

from skiorder.errors import (
    ConfigError,
    DegenerateMatrixError,
    EmptyInputError,
    GeometryError,
    InvalidShapeError,
    KneeUndefinedError,
    LengthMismatchError,
    SimulationDivergedError,
    SkiOrderError,
)
from skiorder.metrics import MetricsReport, NoiseBounds, compute_all, metrics_from_curve, noise_bounds
from skiorder.svknee import KneeGeometry, SingularCurve, detect_knee, singular_curve
from skiorder.trajmat import PreprocessedMatrix, SignalMatrix, assemble_trajectory, preprocess

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateMatrixError",
    "EmptyInputError",
    "GeometryError",
    "InvalidShapeError",
    "KneeGeometry",
    "KneeUndefinedError",
    "LengthMismatchError",
    "MetricsReport",
    "NoiseBounds",
    "PreprocessedMatrix",
    "SignalMatrix",
    "SimulationDivergedError",
    "SingularCurve",
    "SkiOrderError",
    "assemble_trajectory",
    "compute_all",
    "detect_knee",
    "metrics_from_curve",
    "noise_bounds",
    "preprocess",
    "singular_curve",
]
