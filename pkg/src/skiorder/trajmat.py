"""Trajectory matrix assembly and row de-bias/normalization."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from skiorder.errors import DegenerateMatrixError, EmptyInputError, InvalidShapeError, LengthMismatchError

DEFAULT_VARIANCE_FLOOR = 1e-12
_DIM_TAGS = ("x", "y", "z")


def _dim_tag(k: int, d: int) -> str:
    return _DIM_TAGS[k] if d <= len(_DIM_TAGS) else f"d{k}"


@dataclass(frozen=True)
class SignalMatrix:
    """Raw m x N signal matrix; rows are signals, columns are timesteps.

    For swarm data the rows are agent-major: row ``d*i + k`` holds
    dimension ``k`` of agent ``i``.
    """

    values: np.ndarray
    row_labels: tuple = ()
    n_agents: int = 0
    n_steps: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise InvalidShapeError(f"signal matrix must be 2-D, got shape {values.shape}")
        m, n = values.shape
        if m < 1 or n < 2:
            raise InvalidShapeError(f"signal matrix needs m >= 1 and N >= 2, got {m}x{n}")
        object.__setattr__(self, "values", values)
        if not self.row_labels:
            object.__setattr__(self, "row_labels", tuple((i,) for i in range(m)))
        elif len(self.row_labels) != m:
            raise InvalidShapeError(f"{len(self.row_labels)} row labels for {m} rows")
        if not self.n_agents:
            object.__setattr__(self, "n_agents", m)
        if not self.n_steps:
            object.__setattr__(self, "n_steps", n)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def kappa(self) -> float:
        m, n = self.shape
        return min(m, n) / max(m, n)

    @classmethod
    def from_array(cls, values, row_labels: Sequence | None = None) -> "SignalMatrix":
        values = np.asarray(values, dtype=float)
        labels = tuple(tuple(lbl) if isinstance(lbl, tuple) else (lbl,) for lbl in (row_labels or ()))
        return cls(values=values, row_labels=labels)


@dataclass(frozen=True)
class PreprocessedMatrix:
    values: np.ndarray
    kept_rows: np.ndarray
    dropped_rows: np.ndarray
    row_means: np.ndarray
    row_stds: np.ndarray
    source_shape: tuple[int, int] = field(default=(0, 0))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def assemble_trajectory(positions) -> SignalMatrix:
    """Stack per-agent position series into an agent-major signal matrix.

    ``positions`` is a sequence with one entry per agent; each entry is an
    ``(N, d)`` array of points (or an ``(N,)`` array for scalar signals).
    """
    if positions is None or len(positions) == 0:
        raise EmptyInputError("no agent series given")
    series = []
    for i, p in enumerate(positions):
        arr = np.asarray(p, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise EmptyInputError(f"agent {i} has no samples")
        series.append(arr)

    n_steps = series[0].shape[0]
    d = series[0].shape[1]
    for i, arr in enumerate(series):
        if arr.shape[0] != n_steps:
            raise LengthMismatchError(f"agent {i} has {arr.shape[0]} samples, agent 0 has {n_steps}")
        if arr.shape[1] != d:
            raise LengthMismatchError(f"agent {i} has dimension {arr.shape[1]}, agent 0 has {d}")
    if n_steps < 2:
        raise InvalidShapeError("need at least 2 samples per agent")

    # (agents, N, d) -> (agents, d, N) -> (agents*d, N)
    values = np.stack(series).transpose(0, 2, 1).reshape(len(series) * d, n_steps)
    labels = tuple((i, _dim_tag(k, d)) for i in range(len(series)) for k in range(d))
    return SignalMatrix(values=values, row_labels=labels, n_agents=len(series), n_steps=n_steps)


def preprocess(X, variance_floor: float = DEFAULT_VARIANCE_FLOOR) -> PreprocessedMatrix:
    """Remove each row's mean and divide by sqrt(N) times its population std.

    Rows whose population std is at or below ``variance_floor`` are dropped.
    Every retained row of the result has zero mean and unit Euclidean norm.
    """
    values = X.values if isinstance(X, SignalMatrix) else np.asarray(X, dtype=float)
    if values.ndim != 2 or values.shape[1] < 2:
        raise InvalidShapeError(f"need a 2-D matrix with N >= 2 columns, got shape {values.shape}")
    if variance_floor < 0:
        raise ValueError("variance_floor must be non-negative")
    n = values.shape[1]

    means = values.mean(axis=1)
    centered = values - means[:, None]
    stds = np.sqrt(np.mean(centered**2, axis=1))
    keep = stds > variance_floor
    if not keep.any():
        raise DegenerateMatrixError(f"all {values.shape[0]} rows have std <= {variance_floor:g}")

    kept = centered[keep]
    # dividing by the row norm equals dividing by sqrt(N)*std up to rounding,
    # and keeps unit norm exact to machine precision
    norms = np.linalg.norm(kept, axis=1)
    scaled = kept / norms[:, None]
    return PreprocessedMatrix(
        values=scaled,
        kept_rows=np.flatnonzero(keep),
        dropped_rows=np.flatnonzero(~keep),
        row_means=means[keep],
        row_stds=stds[keep],
        source_shape=values.shape,
    )
