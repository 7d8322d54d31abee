"""File formats: trajectory/grid CSV, curve CSV, metrics JSON, ensemble CSVs, PGM."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable

import numpy as np

from skiorder.errors import EmptyInputError, ParseError
from skiorder.metrics import METRIC_KEYS, MetricsReport
from skiorder.svknee import SingularCurve
from skiorder.trajmat import SignalMatrix


def fmt(value) -> str:
    """17 significant digits for floats (round-trips float64); blanks for None."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _json_value(value):
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # repr gives the shortest round-tripping form
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def read_matrix_csv(path) -> SignalMatrix:
    """Read a numeric CSV with one row per signal and one column per timestep.

    A first line starting with ``label`` marks a header; the first column of
    every following line is then a row label.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        lines = [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]
    if not lines:
        raise EmptyInputError(f"{path}: no data")

    start = 0
    labelled = lines[0][0].strip().lower() == "label"
    if labelled:
        start = 1
    rows, labels = [], []
    for lineno, raw in enumerate(lines[start:], start=start + 1):
        cells = raw[1:] if labelled else raw
        if labelled:
            labels.append(raw[0].strip())
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            for col, c in enumerate(cells, start=2 if labelled else 1):
                try:
                    float(c)
                except ValueError:
                    raise ParseError(f"{path}: non-numeric value {c!r} at row {lineno}, column {col}") from None
    if not rows:
        raise EmptyInputError(f"{path}: header but no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ParseError(f"{path}: rows have differing lengths {sorted(widths)}")
    return SignalMatrix.from_array(np.array(rows), labels or None)


def write_matrix_csv(path, X, labels: Iterable | None = None) -> None:
    values = X.values if isinstance(X, SignalMatrix) else np.asarray(X)
    integer = np.issubdtype(values.dtype, np.integer)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if labels is not None:
            w.writerow(["label"] + [f"t{j}" for j in range(values.shape[1])])
            for lbl, row in zip(labels, values):
                w.writerow([lbl] + [fmt(v) for v in row])
        else:
            for row in values:
                w.writerow([str(int(v)) for v in row] if integer else [fmt(v) for v in row])


def swarm_labels(X: SignalMatrix) -> list[str]:
    return [".".join(str(p) for p in lbl) for lbl in X.row_labels]


def write_curve_csv(path, curve: SingularCurve, normalized: bool = True) -> None:
    """``index,sigma`` for every singular value, plus ``x_norm,y_norm`` within the rank."""
    s = curve.sigmas
    r = curve.rank
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "sigma"] + (["x_norm", "y_norm"] if normalized else []))
        for i, sigma in enumerate(s, start=1):
            row = [str(i), fmt(sigma)]
            if normalized:
                row += [fmt(i / r), fmt(sigma / s[0])] if i <= r else ["", ""]
            w.writerow(row)


def report_json(report: MetricsReport) -> str:
    data = {k: _json_value(v) for k, v in report.to_dict().items()}
    return json.dumps(data, indent=2) + "\n"


def write_rows_csv(path, rows: list[dict], columns: list[str] | None = None) -> None:
    if columns is None:
        columns = list(rows[0]) if rows else []
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row.get(c)) for c in columns])


def ensemble_columns(rows: list[dict]) -> list[str]:
    lead = ["model", "trial", "seed"]
    if rows and "lambda" in rows[0]:
        lead.append("lambda")
    return lead + list(METRIC_KEYS) + ["error"]


def write_pgm(path, grid: np.ndarray, states: int) -> None:
    """Binary 8-bit PGM, time running downward, live states brighter."""
    img = (np.asarray(grid).T * (255 // max(states - 1, 1))).astype(np.uint8)
    h, w = img.shape
    with Path(path).open("wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
