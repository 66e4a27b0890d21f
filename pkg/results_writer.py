# results_writer.py
from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from beam_mechanics import BeamShape, eval_shape
from equilibrium_solver import Curve

CURVE_COLUMNS = ["theta_rad", "voltage_v", "w_eq_n_per_m", "u_max_m", "iterations", "converged"]
SHAPE_COLUMNS = ["x_m", "u_z_m"]

FLOAT_FORMAT = "%.17g"  # full double precision
DEFAULT_SHAPE_SAMPLES = 401

RESULTS_DIR = Path("results")


def curve_frame(curve: Curve) -> pd.DataFrame:
    """One row per solved tilt, in grid order."""
    rows = [
        {
            "theta_rad": p.theta,
            "voltage_v": p.voltage,
            "w_eq_n_per_m": p.w_eq,
            "u_max_m": p.u_max,
            "iterations": int(p.iterations),
            "converged": bool(p.converged),
        }
        for p in curve.points
    ]
    df = pd.DataFrame(rows, columns=CURVE_COLUMNS)
    return df.astype({"iterations": "int64", "converged": "bool"})


def sample_shape(shape: BeamShape, n_samples: int = DEFAULT_SHAPE_SAMPLES) -> pd.DataFrame:
    """Deflection sampled uniformly over the whole axis, anchors included."""
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2 (got {n_samples})")
    x = np.linspace(0.0, shape.total_length, int(n_samples))
    u = np.asarray(eval_shape(shape, x), dtype=float)
    return pd.DataFrame({"x_m": x, "u_z_m": u}, columns=SHAPE_COLUMNS)


def _write(df: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def write_curve_csv(curve: Union[Curve, pd.DataFrame], path: Union[str, Path]) -> Path:
    df = curve if isinstance(curve, pd.DataFrame) else curve_frame(curve)
    return _write(df[CURVE_COLUMNS], path)


def write_shape_csv(samples: Union[BeamShape, pd.DataFrame], path: Union[str, Path]) -> Path:
    df = samples if isinstance(samples, pd.DataFrame) else sample_shape(samples)
    return _write(df[SHAPE_COLUMNS], path)


def _read(path: Union[str, Path], columns: list[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Missing results file: {path}")
    df = pd.read_csv(path, float_precision="round_trip")
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    return df[columns]


def read_curve_csv(path: Union[str, Path]) -> pd.DataFrame:
    df = _read(path, CURVE_COLUMNS)
    # header-only files come back with object columns
    return df.astype(
        {
            "theta_rad": "float64",
            "voltage_v": "float64",
            "w_eq_n_per_m": "float64",
            "u_max_m": "float64",
            "iterations": "int64",
            "converged": "bool",
        }
    )


def read_shape_csv(path: Union[str, Path]) -> pd.DataFrame:
    return _read(path, SHAPE_COLUMNS).astype("float64")
