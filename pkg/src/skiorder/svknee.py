"""Singular-value curves and triangle-method knee detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from skiorder.errors import DegenerateMatrixError, KneeUndefinedError, NumericalError
from skiorder.trajmat import PreprocessedMatrix, SignalMatrix


@dataclass(frozen=True)
class SingularCurve:
    """Descending singular values of a matrix plus its shape.

    ``sigmas`` holds all ``min(m, n)`` values; only the first ``rank``
    are used by the knee metrics.
    """

    sigmas: np.ndarray
    rank: int
    m_rows: int
    n_cols: int

    @property
    def full_length(self) -> int:
        return len(self.sigmas)

    @property
    def kappa(self) -> float:
        return min(self.m_rows, self.n_cols) / max(self.m_rows, self.n_cols)

    @property
    def ranked(self) -> np.ndarray:
        return self.sigmas[: self.rank]

    @classmethod
    def from_values(cls, sigmas, m_rows: int | None = None, n_cols: int | None = None, rank: int | None = None):
        """Build a curve from given singular values (all treated as numerically non-zero by default)."""
        s = np.sort(np.asarray(sigmas, dtype=float))[::-1].copy()
        if rank is None:
            rank = int(np.count_nonzero(s > 0))
        m_rows = len(s) if m_rows is None else m_rows
        n_cols = len(s) if n_cols is None else n_cols
        return cls(sigmas=s, rank=rank, m_rows=m_rows, n_cols=n_cols)


@dataclass(frozen=True)
class KneeGeometry:
    """Knee index (1-based) and the triangle P1, Pk, P3 in the normalized plane."""

    index: int
    rank: int
    p1: tuple[float, float]
    pk: tuple[float, float]
    p3: tuple[float, float]

    @property
    def v1(self) -> np.ndarray:
        return np.subtract(self.p1, self.pk)

    @property
    def v2(self) -> np.ndarray:
        return np.subtract(self.p3, self.pk)


def singular_curve(X, rank_tol: float | None = None) -> SingularCurve:
    """Singular values of ``X`` sorted descending, with numerical rank.

    ``X`` may be a PreprocessedMatrix, a SignalMatrix or a plain array.
    The default rank tolerance is ``max(m, n) * sigma_1 * eps``.
    """
    if isinstance(X, (PreprocessedMatrix, SignalMatrix)):
        values = X.values
    else:
        values = np.asarray(X, dtype=float)
    if values.ndim != 2 or min(values.shape) == 0:
        raise DegenerateMatrixError(f"cannot take singular values of shape {values.shape}")
    m, n = values.shape
    try:
        s = np.linalg.svd(values, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed for {m}x{n} matrix: {exc}") from exc
    s = np.sort(s)[::-1]
    if rank_tol is None:
        rank_tol = max(m, n) * s[0] * np.finfo(float).eps
    rank = int(np.count_nonzero(s > rank_tol))
    if rank == 0:
        raise DegenerateMatrixError(f"{m}x{n} matrix has numerical rank 0")
    return SingularCurve(sigmas=s, rank=rank, m_rows=m, n_cols=n)


def knee_position(x, y) -> int:
    """0-based position of the interior point with the largest vertical gap to the end-to-end chord.

    For a fixed chord the vertical gap is proportional to the perpendicular
    distance, so this is the triangle-method knee.  Ties go to the first.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) < 3:
        raise KneeUndefinedError(f"knee needs at least 3 points, got {len(y)}")
    slope = (y[-1] - y[0]) / (x[-1] - x[0])
    dev = np.abs(y - (y[0] + slope * (x - x[0])))[1:-1]
    return int(np.argmax(dev)) + 1


def knee_index(sigmas) -> int:
    """1-based knee index of a descending singular value sequence."""
    s = np.asarray(sigmas, dtype=float)
    return knee_position(np.arange(1, len(s) + 1), s) + 1


def detect_knee(curve: SingularCurve) -> KneeGeometry:
    r = curve.rank
    if r < 3:
        raise KneeUndefinedError(f"numerical rank {r} < 3, knee undefined")
    s = curve.ranked
    k = knee_index(s)
    return KneeGeometry(
        index=k,
        rank=r,
        p1=(0.0, 1.0),
        pk=(k / r, float(s[k - 1] / s[0])),
        p3=(1.0, 0.0),
    )
