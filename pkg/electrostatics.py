# electrostatics.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
from scipy.integrate import simpson

from beam_mechanics import BeamShape, eval_shape
from geometry import VACUUM_PERMITTIVITY, DeviceConfig

ArrayLike = Union[float, np.ndarray]

# Below |u| = theta * max(|a|, |b|) / (h - z) the closed forms lose digits to
# cancellation and the Taylor branch is used instead.
SERIES_SWITCH = 1e-4
SERIES_ORDER = 4  # highest power of u kept in the series branch

DEFAULT_POINTS_PER_SEGMENT = 65


class ContactError(ValueError):
    """The plate reached the electrode plane (a residual gap is <= 0)."""

    def __init__(self, message: str, x: Optional[float] = None):
        super().__init__(message)
        self.x = x


@dataclass(frozen=True)
class CapState:
    """
    Local electrostatic state of one mirror section over an electrode strip.
    Local gap under lateral position y is h - y*theta - z (z > 0 toward the electrode).
    `z` may be an array, one entry per quadrature node.
    """

    theta: float
    z: ArrayLike
    a: float
    b: float
    h: float
    epsilon: float = VACUUM_PERMITTIVITY


@dataclass(frozen=True)
class QuadratureRule:
    points_per_segment: int = DEFAULT_POINTS_PER_SEGMENT
    scheme: str = "simpson"

    def __post_init__(self):
        n = self.points_per_segment
        if n < 3 or n % 2 == 0:
            raise ValueError(f"points_per_segment must be odd and >= 3 (got {n})")
        if self.scheme != "simpson":
            raise ValueError(f"unsupported quadrature scheme: {self.scheme!r}")

    def refined(self, factor: int) -> "QuadratureRule":
        """Same rule with `factor` times as many sub-intervals."""
        return QuadratureRule(points_per_segment=factor * (self.points_per_segment - 1) + 1)


# -------------------------------------------------------------------
# Helpers
# -------------------------------------------------------------------


def _unwrap(value: np.ndarray) -> ArrayLike:
    return float(value) if np.ndim(value) == 0 else value


def _gaps(s: CapState) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    g = s.h - np.asarray(s.z, dtype=float)
    gap_a = g - s.a * s.theta
    gap_b = g - s.b * s.theta
    if np.any(gap_a <= 0) or np.any(gap_b <= 0):
        raise ContactError(
            f"residual gap <= 0 (theta={s.theta:.6g} rad, min gap {float(np.min(np.minimum(gap_a, gap_b))):.3g} m)"
        )
    return g, gap_a, gap_b


def _series_parameters(s: CapState, g: np.ndarray) -> Tuple[float, np.ndarray, float, float]:
    m = max(abs(s.a), abs(s.b))
    u = s.theta * m / g
    return m, u, s.a / m, s.b / m


def _c_series(eps: float, g, m, u, alpha, beta) -> np.ndarray:
    # c = (eps m / g) * sum_n u^n (beta^(n+1) - alpha^(n+1)) / (n + 1)
    total = np.zeros_like(u)
    for n in range(SERIES_ORDER, -1, -1):
        total = total * u + (beta ** (n + 1) - alpha ** (n + 1)) / (n + 1)
    return eps * m / g * total


def _dc_dtheta_series(eps: float, g, m, u, alpha, beta) -> np.ndarray:
    # dc/dtheta = (eps m^2 / g^2) * sum_{n>=1} n u^(n-1) (beta^(n+1) - alpha^(n+1)) / (n + 1)
    total = np.zeros_like(u)
    for n in range(SERIES_ORDER + 1, 0, -1):
        total = total * u + n * (beta ** (n + 1) - alpha ** (n + 1)) / (n + 1)
    return eps * m**2 / g**2 * total


def _log_ratio(theta: float, width: float, gap_b: np.ndarray) -> np.ndarray:
    # ln(gap_a / gap_b) = ln(1 + (b - a) theta / gap_b), exact for narrow strips too
    return np.log1p(width * theta / gap_b)


def _tilt_bracket(theta: float, width: float, g, gap_a, gap_b) -> np.ndarray:
    # ln(gap_b / gap_a) + g / gap_b - g / gap_a written on the gap difference
    x = width * theta / gap_a
    return np.log1p(-x) + x * g / gap_b


# -------------------------------------------------------------------
# Closed-form capacitance and its partials
# -------------------------------------------------------------------


def line_capacitance(s: CapState) -> ArrayLike:
    """
    Parallel-plate capacitance per unit length of the strip a <= y <= b:
        c_m = (eps / theta) * ln((h - a theta - z) / (h - b theta - z))
    with a Taylor branch around theta = 0.
    """
    g, _, gap_b = _gaps(s)
    m, u, alpha, beta = _series_parameters(s, g)
    series = _c_series(s.epsilon, g, m, u, alpha, beta)
    if s.theta == 0.0:
        return _unwrap(series)

    exact = s.epsilon / s.theta * _log_ratio(s.theta, s.b - s.a, gap_b)
    return _unwrap(np.where(np.abs(u) < SERIES_SWITCH, series, exact))


def dc_dtheta(s: CapState) -> ArrayLike:
    """
    Exact theta-partial of line_capacitance (h replaced by h - z):
        (eps / theta^2) * (ln((g - b theta)/(g - a theta)) + g/(g - b theta) - g/(g - a theta)),  g = h - z
    Near theta = 0 it tends to eps (b^2 - a^2) / (2 g^2).
    """
    g, gap_a, gap_b = _gaps(s)
    m, u, alpha, beta = _series_parameters(s, g)
    series = _dc_dtheta_series(s.epsilon, g, m, u, alpha, beta)
    if s.theta == 0.0:
        return _unwrap(series)

    exact = s.epsilon / s.theta**2 * _tilt_bracket(s.theta, s.b - s.a, g, gap_a, gap_b)
    return _unwrap(np.where(np.abs(u) < SERIES_SWITCH, series, exact))


def dc_dz(s: CapState) -> ArrayLike:
    """eps (b - a) / ((h - b theta - z)(h - a theta - z)); regular at theta = 0."""
    _, gap_a, gap_b = _gaps(s)
    return _unwrap(s.epsilon * (s.b - s.a) / (gap_b * gap_a))


def capacitance_partials_fd(s: CapState, rel_step: float = 1e-6) -> Tuple[ArrayLike, ArrayLike]:
    """
    Central finite differences of line_capacitance in theta and z. Steps are
    rel_step times the characteristic scales h / max(|a|, |b|) and h.
    """
    d_theta = rel_step * s.h / max(abs(s.a), abs(s.b))
    d_z = rel_step * s.h

    def _c(theta, z):
        return np.asarray(line_capacitance(CapState(theta, z, s.a, s.b, s.h, s.epsilon)))

    z = np.asarray(s.z, dtype=float)
    fd_theta = (_c(s.theta + d_theta, z) - _c(s.theta - d_theta, z)) / (2.0 * d_theta)
    fd_z = (_c(s.theta, z + d_z) - _c(s.theta, z - d_z)) / (2.0 * d_z)
    return _unwrap(fd_theta), _unwrap(fd_z)


# -------------------------------------------------------------------
# Quadrature along the mirror axis
# -------------------------------------------------------------------


def _integrate(
    config: DeviceConfig,
    theta: float,
    shape: Optional[BeamShape],
    rule: QuadratureRule,
    integrand,
) -> float:
    eps = config.material.permittivity
    offset = config.spring.length  # mirror-local x -> global beam axis
    total = 0.0

    for seg in config.electrodes:
        x = np.linspace(seg.x_start, seg.x_end, rule.points_per_segment)
        z = np.zeros_like(x) if shape is None else np.asarray(eval_shape(shape, x + offset))

        worst = np.minimum(config.gap - seg.a * theta - z, config.gap - seg.b * theta - z)
        if np.any(worst <= 0):
            x_bad = float(x[int(np.argmax(worst <= 0))])
            raise ContactError(
                f"plate touches the electrode at mirror x={x_bad:.6g} m (theta={theta:.6g} rad)",
                x=x_bad,
            )

        values = integrand(CapState(theta, z, seg.a, seg.b, config.gap, eps))
        total += float(simpson(np.asarray(values), x=x))

    return total


def integrate_dc_dtheta(config: DeviceConfig, theta: float, shape: Optional[BeamShape], rule: QuadratureRule = QuadratureRule()) -> float:
    """Torque integrand of the equilibrium equation summed over all electrode segments (F/rad)."""
    return _integrate(config, theta, shape, rule, dc_dtheta)


def integrate_dc_dz(config: DeviceConfig, theta: float, shape: Optional[BeamShape], rule: QuadratureRule = QuadratureRule()) -> float:
    """Vertical-force integrand summed over all electrode segments (F/m)."""
    return _integrate(config, theta, shape, rule, dc_dz)
