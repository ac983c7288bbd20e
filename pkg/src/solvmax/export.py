"""Flat-file output: JSON with "inf" for infinities, CSV with round-trip doubles."""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from typing import Any, Iterable, Sequence, TextIO

import numpy as np

from .geodesic import GeodesicTrajectory
from .pendulum import SeparatrixSet, wrap_angle


def fmt_float(x: float) -> str:
    """17 significant digits; infinities as inf / -inf. NaN is refused."""
    x = float(x)
    if math.isnan(x):
        raise ValueError("refusing to emit NaN")
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def json_safe(obj: Any) -> Any:
    """Recursively convert to plain JSON types; infinities become the string "inf"."""
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [json_safe(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            raise ValueError("refusing to emit NaN")
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(json_safe(obj), indent=2, allow_nan=False) + "\n"


def write_csv(out: TextIO, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


PORTRAIT_HEADER = ("phi", "r", "region", "tau")
TRAJECTORY_HEADER = ("t", "phi", "r", "z", "w1", "w2")


def trajectory_rows(traj: GeodesicTrajectory, n: int) -> list[tuple[float, ...]]:
    """n evenly spaced samples on [0, T]; phi is reported wrapped to (-pi, pi]."""
    if n <= 0:
        return []
    ts = np.linspace(0.0, traj.T, n) if n > 1 else np.array([traj.T])
    ys = traj(ts)
    return [(float(t), wrap_angle(ys[0, i]), *(float(v) for v in ys[1:5, i])) for i, t in enumerate(ts)]


def separatrix_polylines(seps: SeparatrixSet, max_points: int = 400) -> dict[str, list[list[float]]]:
    """Each separatrix as a list of [phi, r] pairs (phi on the continuous lift)."""
    out = {}
    for tag, curve in seps.curves.items():
        pts = curve.points
        step = max(1, len(pts) // max_points)
        sel = pts[::step]
        if len(pts) and not np.array_equal(sel[-1], pts[-1]):
            sel = np.vstack([sel, pts[-1]])
        out[tag] = [[float(p), float(r)] for p, r in sel]
    return out
