# pullin_detector.py
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from beam_mechanics import zero_shape
from electrostatics import ContactError
from equilibrium_solver import (
    MODEL_BENDING,
    EquilibriumPoint,
    SolverOptions,
    solve_point,
    sweep,
    theta_grid,
)
from geometry import DeviceConfig, SectionProperties

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0          # 1 / phi
INV_PHI_SQUARE = (3.0 - math.sqrt(5.0)) / 2.0   # 1 / phi^2

DEFAULT_THETA_REL_TOL = 1e-6


class PullInNotFound(RuntimeError):
    """V(theta) has no interior maximum below the contact tilt."""


class AbovePullIn(PullInNotFound):
    """Requested voltage exceeds the pull-in voltage: no static equilibrium."""

    def __init__(self, voltage: float, v_pullin: float):
        super().__init__(f"V = {voltage:.6g} V exceeds the pull-in voltage {v_pullin:.6g} V")
        self.voltage = voltage
        self.v_pullin = v_pullin


@dataclass(frozen=True, eq=False)
class PullInResult:
    v_pullin: float
    theta_pullin: float
    u_max_pullin: float
    bracket: Tuple[float, float]
    model: str
    point: EquilibriumPoint

    @property
    def theta_pullin_deg(self) -> float:
        return math.degrees(self.theta_pullin)


def golden_section_max(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float,
) -> Tuple[float, float]:
    """
    Golden-section search for the maximum of a unimodal f on [a, b].
    Returns the final interval [c, d] holding the maximiser, d - c <= tol.
    """
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        return a, b

    # steps needed to reach the tolerance
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    for _ in range(n - 1):
        if yc > yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    if yc > yd:
        return a, d
    return c, b


def find_pullin(
    config: DeviceConfig,
    props: SectionProperties,
    opts: SolverOptions = SolverOptions(),
    model: str = MODEL_BENDING,
    *,
    theta_rel_tol: float = DEFAULT_THETA_REL_TOL,
    progress: bool = False,
    debug: bool = False,
) -> PullInResult:
    """
    Pull-in is the maximum of V(theta). A coarse sweep over the default grid
    brackets the peak, then golden-section refines it to theta_rel_tol.
    Raises PullInNotFound when V(theta) keeps rising until the plate touches.
    """
    if not 0 < theta_rel_tol < 1:
        raise ValueError(f"theta_rel_tol must lie in (0, 1) (got {theta_rel_tol!r})")

    grid = theta_grid(config, opts)
    curve = sweep(config, props, grid, opts, model, progress=progress, debug=debug)
    if len(curve) < 2:
        raise PullInNotFound(
            f"{model} curve has fewer than 2 points before contact ({curve.truncated_reason or 'no points'})"
        )

    thetas = curve.thetas
    voltages = curve.voltages
    k = int(np.argmax(voltages))
    if k == len(curve) - 1:
        limit = curve.truncated_reason or f"grid end theta={thetas[-1]:.6g} rad"
        raise PullInNotFound(f"contact-limited: V(theta) still increasing at theta={thetas[-1]:.6g} rad ({limit})")

    lo = thetas[k - 1] if k > 0 else 0.5 * thetas[0]
    hi = thetas[k + 1]

    # sweep points around the peak take part in the final comparison
    window = slice(max(k - 1, 0), k + 2)
    cache: Dict[float, EquilibriumPoint] = {float(p.theta): p for p in curve.points[window]}

    def _voltage(theta: float) -> float:
        try:
            point = solve_point(config, props, theta, opts, model)
        except ContactError:
            return -math.inf
        cache[theta] = point
        return point.voltage

    c, d = golden_section_max(_voltage, lo, hi, theta_rel_tol * thetas[k])
    _voltage(0.5 * (c + d))

    best = max(cache.values(), key=lambda p: p.voltage)
    if debug:
        print(
            f"[find_pullin] {model}: bracket=({lo:.6g}, {hi:.6g}) evaluations={len(cache)} "
            f"theta_PI={best.theta:.9g} V_PI={best.voltage:.9g}"
        )

    return PullInResult(
        v_pullin=best.voltage,
        theta_pullin=best.theta,
        u_max_pullin=best.u_max,
        bracket=(float(lo), float(hi)),
        model=model,
        point=best,
    )


def solve_for_voltage(
    config: DeviceConfig,
    props: SectionProperties,
    voltage: float,
    opts: SolverOptions = SolverOptions(),
    model: str = MODEL_BENDING,
    *,
    pullin: Optional[PullInResult] = None,
    theta_rel_tol: float = 1e-10,
    debug: bool = False,
) -> EquilibriumPoint:
    """
    Operating point at a given voltage on the stable (increasing) branch,
    found by bisection on (0, theta_PI]. Raises AbovePullIn for V > V_PI.
    """
    if not (np.isfinite(voltage) and voltage >= 0):
        raise ValueError(f"voltage must be finite and >= 0 (got {voltage!r})")

    if voltage == 0:
        return EquilibriumPoint(
            theta=0.0,
            voltage=0.0,
            w_eq=0.0,
            shape=zero_shape(config.spring, config.mirror),
            iterations=0,
            converged=True,
        )

    if pullin is None:
        pullin = find_pullin(config, props, opts, model, debug=debug)
    if voltage > pullin.v_pullin:
        raise AbovePullIn(voltage, pullin.v_pullin)
    if voltage == pullin.v_pullin:
        return pullin.point

    cache: Dict[float, EquilibriumPoint] = {}

    def _residual(theta: float) -> float:
        point = solve_point(config, props, theta, opts, model)
        cache[theta] = point
        return point.voltage - voltage

    hi = pullin.theta_pullin
    lo = 1e-6 * hi
    while _residual(lo) >= 0:
        # V(lo) already above the request: move the lower end toward 0
        lo *= 1e-3
        if lo < 1e-300:
            raise ValueError(f"cannot bracket V = {voltage!r} V")

    theta = bisect(_residual, lo, pullin.theta_pullin, xtol=theta_rel_tol * hi, maxiter=200)
    point = cache.get(theta) or solve_point(config, props, theta, opts, model)
    if debug:
        print(f"[solve_for_voltage] V={voltage:.9g} -> theta={point.theta:.9g} (V={point.voltage:.9g})")
    return point
