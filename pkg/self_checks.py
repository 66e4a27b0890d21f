# self_checks.py
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from beam_mechanics import eval_shape, fd_beam_oracle, solve_beam
from electrostatics import (
    CapState,
    capacitance_partials_fd,
    dc_dtheta,
    dc_dz,
    integrate_dc_dtheta,
    integrate_dc_dz,
)
from equilibrium_solver import SolverOptions, fixed_point, load_equivalence_error
from geometry import DeviceConfig, fd_torsion_oracle, section_properties, torsion_constant

DERIVATIVE_TOL = 1e-6
TORSION_TOL = 1e-2
BEAM_TOL = 1e-3      # of the peak deflection
QUADRATURE_TOL = 1e-6
LOAD_EQUIVALENCE_TOL = 0.1   # of the peak deflection, at a low tilt


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_cap_states(rng: np.random.Generator, n: int = 100) -> List[CapState]:
    """
    Valid strip states spread over several decades of tilt, from the
    series branch up to a far-edge gap of 10% of the local gap.
    """
    states = []
    for _ in range(n):
        h = rng.uniform(0.5e-6, 5e-6)
        b = rng.uniform(5e-6, 200e-6)
        a = rng.uniform(0.0, 0.9) * b
        z = rng.uniform(-0.1, 0.1) * h
        g = h - z
        theta = g / b * 10.0 ** rng.uniform(-7.0, np.log10(0.9))
        states.append(CapState(theta=theta, z=z, a=a, b=b, h=h))
    return states


def check_derivatives(rng: np.random.Generator, n: int = 100) -> CheckResult:
    worst = 0.0
    for s in random_cap_states(rng, n):
        fd_theta, fd_z = capacitance_partials_fd(s)
        worst = max(
            worst,
            abs(dc_dtheta(s) - fd_theta) / abs(fd_theta),
            abs(dc_dz(s) - fd_z) / abs(fd_z),
        )
    return CheckResult(
        name="capacitance derivatives vs finite differences",
        passed=worst < DERIVATIVE_TOL,
        detail=f"{n} random states, max relative error {worst:.3g} (limit {DERIVATIVE_TOL:g})",
    )


def check_torsion(config: DeviceConfig, n: int = 60) -> CheckResult:
    t, w = config.spring.thickness, config.spring.width
    series = torsion_constant(t, w)
    oracle = fd_torsion_oracle(t, w, n=n)
    err = abs(series - oracle) / series
    return CheckResult(
        name="torsion constant vs stress-function FD",
        passed=err < TORSION_TOL,
        detail=f"J_p series={series:.6g} m^4, FD={oracle:.6g} m^4, relative error {err:.3g} (limit {TORSION_TOL:g})",
    )


def check_beam(config: DeviceConfig, w_eq: float = 1.0, n_nodes: int = 401) -> CheckResult:
    props = section_properties(config)
    shape = solve_beam(props, config.material, config.spring, config.mirror, w_eq)
    x, u_fd = fd_beam_oracle(props, config.material, config.spring, config.mirror, w_eq, n_nodes=n_nodes)
    u = np.asarray(eval_shape(shape, x))
    peak = float(np.max(np.abs(u)))
    err = float(np.max(np.abs(u - u_fd))) / peak
    return CheckResult(
        name="closed-form beam vs FD oracle",
        passed=err < BEAM_TOL,
        detail=f"{n_nodes} nodes, max discrepancy {err:.3g} of peak (limit {BEAM_TOL:g})",
    )


def check_quadrature(config: DeviceConfig, opts: SolverOptions, refine: int = 4) -> CheckResult:
    props = section_properties(config)
    theta = 0.5 * config.theta_geo
    point = fixed_point(config, props, theta, opts)
    coarse, fine = opts.quadrature, opts.quadrature.refined(refine)

    errs = []
    for integral in (integrate_dc_dtheta, integrate_dc_dz):
        a = integral(config, theta, point.shape, coarse)
        b = integral(config, theta, point.shape, fine)
        errs.append(abs(a - b) / abs(b))
    err = max(errs)
    return CheckResult(
        name="quadrature refinement at mid-range tilt",
        passed=err < QUADRATURE_TOL,
        detail=(
            f"theta={theta:.6g} rad, {coarse.points_per_segment} vs {fine.points_per_segment} points/segment, "
            f"max relative change {err:.3g} (limit {QUADRATURE_TOL:g})"
        ),
    )


def check_load_equivalence(config: DeviceConfig, opts: SolverOptions, fraction: float = 0.1) -> CheckResult:
    props = section_properties(config)
    theta = fraction * config.theta_geo
    point = fixed_point(config, props, theta, opts)
    err = load_equivalence_error(config, props, point)
    return CheckResult(
        name="uniform equivalent load vs actual load profile",
        passed=err < LOAD_EQUIVALENCE_TOL,
        detail=f"theta={theta:.6g} rad, max deflection difference {err:.3g} of peak (limit {LOAD_EQUIVALENCE_TOL:g})",
    )


def run_self_checks(
    config: DeviceConfig,
    opts: SolverOptions = SolverOptions(),
    *,
    seed: Optional[int] = 0,
    n_states: int = 100,
    debug: bool = False,
) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    results = [
        check_derivatives(rng, n_states),
        check_torsion(config),
        check_beam(config),
        check_quadrature(config, opts),
        check_load_equivalence(config, opts),
    ]
    if debug:
        for r in results:
            print(f"[run_self_checks] {'ok' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return results
