# scaling_study.py
from __future__ import annotations

import math
import sys
from typing import List, Sequence

import pandas as pd

from equilibrium_solver import MODEL_BENDING, SolverOptions
from geometry import DeviceConfig, scale_config, section_properties
from pullin_detector import PullInNotFound, find_pullin

SCALING_COLUMNS = [
    "factor",
    "v_pullin_v",
    "theta_pullin_rad",
    "theta_pullin_deg",
    "u_max_pullin_m",
    "u_max_over_gap",
]


def run_scaling_study(
    config: DeviceConfig,
    factors: Sequence[float],
    opts: SolverOptions = SolverOptions(),
    model: str = MODEL_BENDING,
    *,
    debug: bool = False,
) -> pd.DataFrame:
    """
    Pull-in parameters of uniformly scaled copies of one device, one row per
    factor in the given order. A factor whose curve is contact-limited keeps
    its row with NaN results.
    """
    if len(factors) == 0:
        raise ValueError("at least one scale factor is required")

    rows: List[dict] = []
    for factor in factors:
        scaled = scale_config(config, factor)
        props = section_properties(scaled)
        try:
            res = find_pullin(scaled, props, opts, model)
        except PullInNotFound as e:
            if debug:
                print(f"[run_scaling_study] factor={factor:g}: {e}", file=sys.stderr)
            rows.append({"factor": float(factor), **{c: math.nan for c in SCALING_COLUMNS[1:]}})
            continue

        rows.append(
            {
                "factor": float(factor),
                "v_pullin_v": res.v_pullin,
                "theta_pullin_rad": res.theta_pullin,
                "theta_pullin_deg": res.theta_pullin_deg,
                "u_max_pullin_m": res.u_max_pullin,
                "u_max_over_gap": res.u_max_pullin / scaled.gap,
            }
        )
        if debug:
            print(f"[run_scaling_study] factor={factor:g} V_PI={res.v_pullin:.6g} V theta_PI={res.theta_pullin_deg:.4f} deg")

    return pd.DataFrame(rows, columns=SCALING_COLUMNS)
