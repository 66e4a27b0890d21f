# equilibrium_solver.py
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from beam_mechanics import BeamShape, eval_shape, fd_beam_oracle, max_deflection, solve_beam, zero_shape
from electrostatics import CapState, ContactError, QuadratureRule, dc_dz, integrate_dc_dtheta, integrate_dc_dz
from geometry import DeviceConfig, SectionProperties

MODEL_BENDING = "bending"
MODEL_RIGID = "rigid"
MODELS = (MODEL_BENDING, MODEL_RIGID)

# Validity limits of the small-bending / rigid-section hypotheses
SMALL_BENDING_LIMIT = 0.15   # u_max / gap
MIN_ASPECT_RATIO = 5.0       # L_m / W_m

# Relaxation used once the load residual stops shrinking
FALLBACK_RELAXATION = 0.5


# -------------------------------------------------------------------
# Config
# -------------------------------------------------------------------


@dataclass(frozen=True)
class SolverOptions:
    load_rel_tol: float = 1e-8
    max_iterations: int = 100
    relaxation: float = 1.0
    quadrature: QuadratureRule = field(default_factory=QuadratureRule)
    grid_points: int = 200
    grid_start_fraction: float = 1e-3   # of theta_geo
    grid_end_fraction: float = 0.98     # of theta_geo
    load_floor: float = 1e-12           # N/m, absolute floor of the convergence test
    n_jobs: int = 1

    def __post_init__(self):
        if not self.load_rel_tol > 0:
            raise ValueError(f"load_rel_tol must be > 0 (got {self.load_rel_tol!r})")
        if int(self.max_iterations) < 1:
            raise ValueError(f"max_iterations must be >= 1 (got {self.max_iterations!r})")
        if not 0 < self.relaxation <= 1:
            raise ValueError(f"relaxation must lie in (0, 1] (got {self.relaxation!r})")
        if int(self.grid_points) < 2:
            raise ValueError(f"grid_points must be >= 2 (got {self.grid_points!r})")
        if not 0 < self.grid_start_fraction < self.grid_end_fraction < 1:
            raise ValueError("0 < grid_start_fraction < grid_end_fraction < 1 violated")
        if not self.load_floor > 0:
            raise ValueError(f"load_floor must be > 0 (got {self.load_floor!r})")
        if int(self.n_jobs) == 0:
            raise ValueError("n_jobs must be non-zero (use -1 for all cores)")


# -------------------------------------------------------------------
# Results
# -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EquilibriumPoint:
    theta: float
    voltage: float
    w_eq: float
    shape: BeamShape
    iterations: int
    converged: bool
    history: Tuple[Tuple[float, float], ...] = ()  # (V_i, w_eq_i) per iteration

    @property
    def u_max(self) -> float:
        return max_deflection(self.shape)

    @property
    def theta_deg(self) -> float:
        return math.degrees(self.theta)


@dataclass(frozen=True)
class Curve:
    model: str
    points: Tuple[EquilibriumPoint, ...]
    truncated_reason: Optional[str] = None
    truncated_theta: Optional[float] = None

    @property
    def thetas(self) -> np.ndarray:
        return np.array([p.theta for p in self.points], dtype=float)

    @property
    def voltages(self) -> np.ndarray:
        return np.array([p.voltage for p in self.points], dtype=float)

    @property
    def loads(self) -> np.ndarray:
        return np.array([p.w_eq for p in self.points], dtype=float)

    @property
    def u_max(self) -> np.ndarray:
        return np.array([p.u_max for p in self.points], dtype=float)

    def __len__(self) -> int:
        return len(self.points)


# -------------------------------------------------------------------
# Helpers
# -------------------------------------------------------------------


def _check_model(model: str) -> str:
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r} (expected one of {', '.join(MODELS)})")
    return model


def theta_grid(
    config: DeviceConfig,
    opts: SolverOptions = SolverOptions(),
    *,
    theta_max: Optional[float] = None,
    n_points: Optional[int] = None,
) -> np.ndarray:
    """Uniform tilt grid on (start_fraction * theta_geo, theta_max or end_fraction * theta_geo]."""
    theta_geo = config.theta_geo
    start = opts.grid_start_fraction * theta_geo
    stop = opts.grid_end_fraction * theta_geo if theta_max is None else float(theta_max)
    n = opts.grid_points if n_points is None else int(n_points)

    if not start < stop < theta_geo:
        raise ValueError(
            f"theta_max must lie in ({start:.6g}, {theta_geo:.6g}) rad (got {stop:.6g})"
        )
    if n < 2:
        raise ValueError(f"a theta grid needs at least 2 points (got {n})")
    return np.linspace(start, stop, n)


# -------------------------------------------------------------------
# Torque balance and load update
# -------------------------------------------------------------------


def equilibrium_voltage(
    config: DeviceConfig,
    props: SectionProperties,
    theta: float,
    shape: Optional[BeamShape],
    rule: QuadratureRule = QuadratureRule(),
) -> float:
    """
    Voltage holding the mirror at tilt theta with the given bending shape:
        k_theta * theta = (V^2 / 2) * integral(dc/dtheta dx)
    """
    if not theta > 0:
        raise ValueError(f"theta must be > 0 (got {theta!r})")

    torque = integrate_dc_dtheta(config, theta, shape, rule)
    if not torque > 0:
        raise ValueError(f"non-positive electrostatic torque integral ({torque:.3g}); check the electrode layout")
    return math.sqrt(2.0 * props.k_theta * theta / torque)


def update_load(
    config: DeviceConfig,
    props: SectionProperties,
    theta: float,
    voltage: float,
    shape: Optional[BeamShape],
    rule: QuadratureRule = QuadratureRule(),
) -> float:
    """Uniform load (N/m) equivalent to the vertical pull: V^2 / (2 L_m) * integral(dc/dz dx)."""
    force = integrate_dc_dz(config, theta, shape, rule)
    return voltage**2 / (2.0 * config.mirror.length) * force


def distributed_load(
    config: DeviceConfig,
    theta: float,
    voltage: float,
    shape: Optional[BeamShape],
) -> Callable[[np.ndarray], np.ndarray]:
    """
    Actual vertical pull per unit length, w(x) = V^2 / 2 * dc/dz(x), as a
    function of the global axis coordinate. Zero off the electrodes.
    """
    eps = config.material.permittivity
    offset = config.spring.length

    def _load(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        xm = x - offset
        for seg in config.electrodes:
            on = (xm >= seg.x_start) & (xm <= seg.x_end)
            if not np.any(on):
                continue
            z = 0.0 if shape is None else np.asarray(eval_shape(shape, x[on]))
            out[on] = 0.5 * voltage**2 * dc_dz(CapState(theta, z, seg.a, seg.b, config.gap, eps))
        return out

    return _load


def load_equivalence_error(
    config: DeviceConfig,
    props: SectionProperties,
    point: EquilibriumPoint,
    n_nodes: int = 801,
) -> float:
    """
    Largest deflection difference between the beam under the actual load
    profile and the beam under the equivalent uniform w_eq, relative to the
    peak of the latter. Both are solved on the same finite-difference grid.
    """
    if not point.w_eq > 0:
        raise ValueError(f"point carries no bending load (w_eq={point.w_eq!r})")

    material, spring, mirror = config.material, config.spring, config.mirror
    _, u_uniform = fd_beam_oracle(props, material, spring, mirror, point.w_eq, n_nodes)
    profile = distributed_load(config, point.theta, point.voltage, point.shape)
    _, u_actual = fd_beam_oracle(props, material, spring, mirror, point.w_eq, n_nodes, load_profile=profile)

    return float(np.max(np.abs(u_actual - u_uniform)) / np.max(np.abs(u_uniform)))


# -------------------------------------------------------------------
# Fixed point and single-tilt solves
# -------------------------------------------------------------------


def fixed_point(
    config: DeviceConfig,
    props: SectionProperties,
    theta: float,
    opts: SolverOptions = SolverOptions(),
    *,
    initial_load: float = 0.0,
    debug: bool = False,
) -> EquilibriumPoint:
    """
    Self-consistent voltage and equivalent load at a fixed tilt.

    Starting from w_0 = initial_load, each iteration bends the beam under w_i,
    solves the torque balance for V_i and relaxes toward the load that V_i
    produces on the bent mirror. Stops once the load moves by less than
    load_rel_tol relative (floored at load_floor). Contact anywhere under the
    plate raises ContactError. Running out of iterations returns the last
    iterate with converged=False.
    """
    theta_geo = config.theta_geo
    if not 0 < theta < theta_geo:
        raise ValueError(f"theta must lie in (0, {theta_geo:.6g}) rad (got {theta!r})")
    if not (np.isfinite(initial_load) and initial_load >= 0):
        raise ValueError(f"initial_load must be finite and >= 0 (got {initial_load!r})")

    material, spring, mirror = config.material, config.spring, config.mirror
    rule = opts.quadrature
    relax = opts.relaxation

    w = float(initial_load)
    history: List[Tuple[float, float]] = []
    converged = False
    last_step: Optional[float] = None
    iterations = 0

    for iterations in range(1, int(opts.max_iterations) + 1):
        shape = solve_beam(props, material, spring, mirror, w)
        voltage = equilibrium_voltage(config, props, theta, shape, rule)
        history.append((voltage, w))

        target = update_load(config, props, theta, voltage, shape, rule)
        w_next = (1.0 - relax) * w + relax * target
        step = abs(w_next - w)

        if debug:
            print(
                f"[fixed_point] theta={theta:.6g} iter={iterations} V={voltage:.9g} "
                f"w={w_next:.9g} dw={step:.3g} relax={relax:g}"
            )

        w = w_next
        if step <= opts.load_rel_tol * max(abs(w), opts.load_floor):
            converged = True
            break

        if last_step is not None and step > last_step and relax > FALLBACK_RELAXATION:
            relax = FALLBACK_RELAXATION
            if debug:
                print(f"[fixed_point] theta={theta:.6g} oscillation detected, relaxation -> {relax:g}")
        last_step = step

    # final shape and voltage consistent with the returned load
    shape = solve_beam(props, material, spring, mirror, w)
    voltage = equilibrium_voltage(config, props, theta, shape, rule)

    if debug and not converged:
        print(f"[fixed_point] theta={theta:.6g} not converged after {iterations} iterations")

    return EquilibriumPoint(
        theta=float(theta),
        voltage=voltage,
        w_eq=w,
        shape=shape,
        iterations=iterations,
        converged=converged,
        history=tuple(history),
    )


def rigid_point(
    config: DeviceConfig,
    props: SectionProperties,
    theta: float,
    opts: SolverOptions = SolverOptions(),
) -> EquilibriumPoint:
    """Torsion-only baseline: torque balance with the mirror kept flat."""
    theta_geo = config.theta_geo
    if not 0 < theta < theta_geo:
        raise ValueError(f"theta must lie in (0, {theta_geo:.6g}) rad (got {theta!r})")

    shape = zero_shape(config.spring, config.mirror)
    voltage = equilibrium_voltage(config, props, theta, shape, opts.quadrature)
    return EquilibriumPoint(
        theta=float(theta),
        voltage=voltage,
        w_eq=0.0,
        shape=shape,
        iterations=1,
        converged=True,
        history=((voltage, 0.0),),
    )


def solve_point(
    config: DeviceConfig,
    props: SectionProperties,
    theta: float,
    opts: SolverOptions = SolverOptions(),
    model: str = MODEL_BENDING,
    *,
    debug: bool = False,
) -> EquilibriumPoint:
    if _check_model(model) == MODEL_RIGID:
        return rigid_point(config, props, theta, opts)
    return fixed_point(config, props, theta, opts, debug=debug)


# -------------------------------------------------------------------
# Sweeps
# -------------------------------------------------------------------


def _point_or_contact(config, props, theta, opts, model, debug) -> Union[EquilibriumPoint, ContactError]:
    try:
        return solve_point(config, props, theta, opts, model, debug=debug)
    except ContactError as e:
        return e


def sweep(
    config: DeviceConfig,
    props: SectionProperties,
    thetas: Sequence[float],
    opts: SolverOptions = SolverOptions(),
    model: str = MODEL_BENDING,
    *,
    progress: bool = False,
    debug: bool = False,
) -> Curve:
    """
    Solve every tilt of a strictly increasing grid inside (0, theta_geo).
    The curve stops at the first tilt that brings the plate into contact;
    the reason and tilt are recorded on the returned Curve.
    """
    _check_model(model)
    grid = np.asarray(thetas, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("theta grid is empty")
    if not np.all(np.isfinite(grid)):
        raise ValueError("theta grid contains non-finite values")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("theta grid must be strictly increasing")
    theta_geo = config.theta_geo
    if grid[0] <= 0 or grid[-1] >= theta_geo:
        raise ValueError(f"theta grid must lie inside (0, {theta_geo:.6g}) rad")

    n_jobs = int(opts.n_jobs)
    results: List[Union[EquilibriumPoint, ContactError]] = []

    if n_jobs == 1:
        for theta in tqdm(grid, desc=f"{model} sweep", unit="pt", disable=not progress):
            res = _point_or_contact(config, props, float(theta), opts, model, debug)
            results.append(res)
            if isinstance(res, ContactError):
                break
    else:
        # points are independent; threads share the config without pickling
        tasks = (delayed(_point_or_contact)(config, props, float(theta), opts, model, debug) for theta in grid)
        done = Parallel(n_jobs=n_jobs, prefer="threads", return_as="generator")(tasks)
        results = list(tqdm(done, total=grid.size, desc=f"{model} sweep", unit="pt", disable=not progress))

    points: List[EquilibriumPoint] = []
    reason: Optional[str] = None
    truncated_at: Optional[float] = None
    for theta, res in zip(grid, results):
        if isinstance(res, ContactError):
            reason = f"contact: {res}"
            truncated_at = float(theta)
            break
        points.append(res)

    if debug and reason is not None:
        print(f"[sweep] {model} curve truncated at theta={truncated_at:.6g} ({reason})")

    return Curve(model=model, points=tuple(points), truncated_reason=reason, truncated_theta=truncated_at)


# -------------------------------------------------------------------
# Regime report
# -------------------------------------------------------------------


def regime_report(config: DeviceConfig, point: EquilibriumPoint) -> Dict[str, Any]:
    """
    How far an operating point sits inside the model's validity range:
    small bending (u_max / gap) and a narrow mirror strip (L_m / W_m).
    """
    u_max = point.u_max
    u_ratio = u_max / config.gap
    aspect = config.mirror.length / config.mirror.width

    warnings: List[str] = []
    if u_ratio >= SMALL_BENDING_LIMIT:
        warnings.append(
            f"u_max/gap = {u_ratio:.3f} >= {SMALL_BENDING_LIMIT:g}; small-bending hypothesis is stretched"
        )
    if aspect < MIN_ASPECT_RATIO:
        warnings.append(
            f"mirror aspect ratio L/W = {aspect:.2f} < {MIN_ASPECT_RATIO:g}; cross-sections may not stay rigid"
        )

    return {
        "theta_rad": point.theta,
        "theta_deg": point.theta_deg,
        "voltage_v": point.voltage,
        "u_max_m": u_max,
        "u_max_over_gap": u_ratio,
        "small_bending_ok": u_ratio < SMALL_BENDING_LIMIT,
        "aspect_ratio": aspect,
        "aspect_ok": aspect >= MIN_ASPECT_RATIO,
        "warnings": warnings,
    }
