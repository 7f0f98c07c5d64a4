"""CSV and JSON outputs. Column labels use 1-based node ids."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from kuracluster.integrate import Trajectory
from kuracluster.model import wrap_2pi

FMT = "%.12g"


def trajectory_columns(traj: Trajectory) -> list[str]:
    cols = ["t"] + [f"theta_{i + 1}" for i in range(traj.graph.n)]
    if traj.partition is not None:
        cols += [f"e_{i + 1}" for i in traj.partition.non_representatives]
    cols += [f"k_{i + 1}_{j + 1}" for i, j in traj.graph.edges]
    return cols


def trajectory_table(traj: Trajectory) -> np.ndarray:
    parts = [traj.t[:, None], wrap_2pi(traj.theta)]
    if traj.partition is not None:
        parts.append(traj.e)
    parts.append(traj.k)
    return np.hstack(parts)


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        return repr(float(x))
    return FMT % x


def write_table(path: Path, columns: list[str], rows: np.ndarray) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def read_table(path: Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in r] for r in reader]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    write_table(path, trajectory_columns(traj), trajectory_table(traj))


def write_metrics_csv(path: Path, metrics) -> None:
    rows = np.column_stack([metrics.t, metrics.max_abs_error, metrics.intra_residual,
                            metrics.inter_norm])
    write_table(path, ["t", "max_abs_error", "intra_residual", "inter_norm"], rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(obj, path: Path | None = None) -> str:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text

