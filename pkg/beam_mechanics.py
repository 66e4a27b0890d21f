# beam_mechanics.py
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from geometry import Material, MirrorGeometry, SectionProperties, SpringGeometry

ArrayLike = Union[float, np.ndarray]

# Relative slack allowed when evaluating exactly at the anchors.
DOMAIN_REL_TOL = 1e-12

# Gauss points per grid cell when a load profile is projected on the hats
PROFILE_GAUSS_POINTS = 8


@dataclass(frozen=True, eq=False)
class BeamShape:
    """
    Vertical deflection u_z(x) of the spring - mirror - spring axis.

    breakpoints: (0, L_s, L_s + L_m, 2 L_s + L_m) on the global axis, anchors at both ends.
    coefficients: (3, 5) array, ascending powers of the segment-local coordinate
                  s = x - breakpoints[k]; springs are cubic (last column 0), the mirror quartic.
    """

    breakpoints: Tuple[float, float, float, float]
    coefficients: np.ndarray
    w_eq: float

    @property
    def total_length(self) -> float:
        return self.breakpoints[-1]

    @property
    def spring_length(self) -> float:
        return self.breakpoints[1]


def _breakpoints(spring: SpringGeometry, mirror: MirrorGeometry) -> Tuple[float, float, float, float]:
    ls, lm = spring.length, mirror.length
    return (0.0, ls, ls + lm, 2.0 * ls + lm)


def zero_shape(spring: SpringGeometry, mirror: MirrorGeometry) -> BeamShape:
    """Undeformed axis (rigid-mirror model)."""
    return BeamShape(breakpoints=_breakpoints(spring, mirror), coefficients=np.zeros((3, 5)), w_eq=0.0)


# -------------------------------------------------------------------
# Closed-form piecewise solution
# -------------------------------------------------------------------


def _segment_transfer(length: float, flex: float, load: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    State (u, u', M, Q) carried across one segment in dimensionless form,
    M = EI u'', Q = EI u''' scaled by the reference stiffness. `flex` is
    EI_ref / EI of the segment. Returns the transfer matrix and the load column.
    """
    l, r = length, flex
    transfer = np.array(
        [
            [1.0, l, r * l**2 / 2.0, r * l**3 / 6.0],
            [0.0, 1.0, r * l, r * l**2 / 2.0],
            [0.0, 0.0, 1.0, l],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    loading = load * np.array([r * l**4 / 24.0, r * l**3 / 6.0, l**2 / 2.0, l])
    return transfer, loading


def solve_beam(
    props: SectionProperties,
    material: Material,
    spring: SpringGeometry,
    mirror: MirrorGeometry,
    w_eq: float,
) -> BeamShape:
    """
    Clamped spring - mirror - spring beam with a uniform load w_eq (N/m) on the
    mirror span only:
        u'''' = 0             on the springs
        u'''' = w_eq / (E I2) on the mirror
    Unknowns are (u, u', EI u'', EI u''') at the left end of each segment; one
    12 x 12 solve enforces the 4 clamped conditions and the 2 x 4 junction
    continuity conditions. Lengths are scaled by L_m and stiffness by E I2.
    """
    if not np.isfinite(w_eq):
        raise ValueError(f"w_eq must be finite (got {w_eq!r})")

    E = material.youngs_modulus
    ei = np.array([E * props.i_spring, E * props.i_mirror, E * props.i_spring])
    lengths = np.array([spring.length, mirror.length, spring.length])
    loads = np.array([0.0, w_eq, 0.0])

    l_ref, ei_ref = mirror.length, E * props.i_mirror
    q = loads * l_ref**3 / ei_ref
    lengths_nd = lengths / l_ref
    flex = ei_ref / ei

    A = np.zeros((12, 12))
    rhs = np.zeros(12)

    # clamped left anchor: u = u' = 0
    A[0, 0] = 1.0
    A[1, 1] = 1.0

    # junctions: X_{k+1} - T_k X_k = p_k
    row = 2
    for k in range(2):
        T, p = _segment_transfer(lengths_nd[k], flex[k], q[k])
        A[row:row + 4, 4 * (k + 1):4 * (k + 2)] = np.eye(4)
        A[row:row + 4, 4 * k:4 * (k + 1)] = -T
        rhs[row:row + 4] = p
        row += 4

    # clamped right anchor: u = u' = 0 at the end of the last spring
    T, p = _segment_transfer(lengths_nd[2], flex[2], q[2])
    A[10:12, 8:12] = T[:2]
    rhs[10:12] = -p[:2]

    try:
        X = scipy.linalg.solve(A, rhs)
    except scipy.linalg.LinAlgError as e:
        raise RuntimeError(f"singular beam system: {e}") from e

    coefficients = np.zeros((3, 5))
    for k in range(3):
        u0, slope0, m0, q0 = X[4 * k:4 * (k + 1)]
        moment = m0 * ei_ref / l_ref       # N*m
        shear = q0 * ei_ref / l_ref**2     # N
        coefficients[k] = [
            u0 * l_ref,
            slope0,
            moment / (2.0 * ei[k]),
            shear / (6.0 * ei[k]),
            loads[k] / (24.0 * ei[k]),
        ]

    return BeamShape(breakpoints=_breakpoints(spring, mirror), coefficients=coefficients, w_eq=float(w_eq))


def eval_shape(shape: BeamShape, x: ArrayLike, derivative: int = 0) -> ArrayLike:
    """
    u_z (or its `derivative`-th x derivative) at global positions x in [0, L_total].
    A mirror-local position x_m maps to x_m + L_s.
    """
    x_arr = np.asarray(x, dtype=float)
    total = shape.total_length
    slack = DOMAIN_REL_TOL * total
    if np.any(x_arr < -slack) or np.any(x_arr > total + slack) or np.any(~np.isfinite(x_arr)):
        raise ValueError(f"x outside the beam domain [0, {total:.6g}] m")
    if derivative not in range(5):
        raise ValueError(f"derivative order must be 0..4 (got {derivative!r})")

    x_arr = np.clip(x_arr, 0.0, total)
    seg = np.searchsorted(np.asarray(shape.breakpoints[1:3]), x_arr, side="right")
    s = x_arr - np.asarray(shape.breakpoints)[seg]

    coeffs = shape.coefficients[seg]  # (..., 5)
    for _ in range(derivative):
        powers = np.arange(1, coeffs.shape[-1])
        coeffs = coeffs[..., 1:] * powers

    value = np.zeros_like(s)
    for k in range(coeffs.shape[-1] - 1, -1, -1):
        value = value * s + coeffs[..., k]

    return float(value) if np.ndim(value) == 0 else value


def max_deflection(shape: BeamShape) -> float:
    """Deflection at midspan, the extremum of the symmetric solution."""
    return float(eval_shape(shape, 0.5 * shape.total_length))


# -------------------------------------------------------------------
# Finite-difference oracle
# -------------------------------------------------------------------


def _hat_integral(nodes: np.ndarray, dx: float, lo: float, hi: float) -> np.ndarray:
    """Integral over [lo, hi] of the unit hat function centred on each node (half-width dx)."""

    def _cumulative(t):
        r = np.clip((t - nodes) / dx, -1.0, 1.0)
        return dx * np.where(r < 0.0, 0.5 * (1.0 + r) ** 2, 1.0 - 0.5 * (1.0 - r) ** 2)

    return _cumulative(hi) - _cumulative(lo)


def _hat_profile_integral(nodes: np.ndarray, dx: float, lo: float, hi: float, profile) -> np.ndarray:
    """Integral over [lo, hi] of profile(x) times the unit hat centred on each node."""
    t, wt = np.polynomial.legendre.leggauss(PROFILE_GAUSS_POINTS)
    left = np.clip(nodes[:-1], lo, hi)
    right = np.clip(nodes[1:], lo, hi)
    half = 0.5 * (right - left)

    x = (0.5 * (left + right))[:, None] + half[:, None] * t[None, :]
    fx = np.asarray(profile(x), dtype=float) * wt[None, :] * half[:, None]
    r = (x - nodes[:-1, None]) / dx

    out = np.zeros_like(nodes)
    out[:-1] += np.sum(fx * (1.0 - r), axis=1)
    out[1:] += np.sum(fx * r, axis=1)
    return out


def fd_beam_oracle(
    props: SectionProperties,
    material: Material,
    spring: SpringGeometry,
    mirror: MirrorGeometry,
    w_eq: float,
    n_nodes: int = 401,
    *,
    load_profile: Optional[Callable[[np.ndarray], ArrayLike]] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Second-order finite-difference solution of the same clamped piecewise beam on
    a uniform grid. Mixed form M'' = w, u'' = M / EI; both equations are tested
    against hat functions so the EI jump and the load edge, which fall between
    nodes in general, keep second-order accuracy.

    load_profile, when given, replaces the uniform w_eq on the mirror span: a
    vectorised w(x) in N/m of the global axis coordinate x (m).

    Returns (x, u) sampled at the n_nodes grid points.
    """
    if n_nodes < 201:
        raise ValueError(f"n_nodes must be >= 201 (got {n_nodes})")

    E = material.youngs_modulus
    ei_spring, ei_mirror = E * props.i_spring, E * props.i_mirror
    l_ref = mirror.length
    q = w_eq * l_ref**3 / ei_mirror

    bp = np.asarray(_breakpoints(spring, mirror)) / l_ref
    n = int(n_nodes)
    xi = np.linspace(0.0, bp[-1], n)
    dxi = xi[1] - xi[0]

    flex_hat = (
        _hat_integral(xi, dxi, bp[0], bp[1]) * (ei_mirror / ei_spring)
        + _hat_integral(xi, dxi, bp[1], bp[2])
        + _hat_integral(xi, dxi, bp[2], bp[3]) * (ei_mirror / ei_spring)
    )
    if load_profile is None:
        load_hat = q * _hat_integral(xi, dxi, bp[1], bp[2])
    else:
        scale = l_ref**3 / ei_mirror
        load_hat = _hat_profile_integral(xi, dxi, bp[1], bp[2], lambda s: scale * load_profile(s * l_ref))

    # unknowns: [u_0 .. u_{n-1}, M_0 .. M_{n-1}]
    A = sp.lil_matrix((2 * n, 2 * n))
    rhs = np.zeros(2 * n)

    row = 0
    for i in range(1, n - 1):
        # M'' = w
        A[row, n + i - 1] = 1.0 / dxi
        A[row, n + i] = -2.0 / dxi
        A[row, n + i + 1] = 1.0 / dxi
        rhs[row] = load_hat[i]
        row += 1
        # u'' = M / EI
        A[row, i - 1] = 1.0 / dxi
        A[row, i] = -2.0 / dxi
        A[row, i + 1] = 1.0 / dxi
        A[row, n + i] = -flex_hat[i]
        row += 1

    # clamped anchors: u = 0 and zero end slope folded into the half-hat balance
    A[row, 0] = 1.0
    row += 1
    A[row, 1] = 1.0 / dxi
    A[row, 0] = -1.0 / dxi
    A[row, n] = -flex_hat[0]
    row += 1
    A[row, n - 1] = 1.0
    row += 1
    A[row, n - 2] = 1.0 / dxi
    A[row, n - 1] = -1.0 / dxi
    A[row, 2 * n - 1] = -flex_hat[n - 1]

    solution = spsolve(A.tocsc(), rhs)
    if not np.all(np.isfinite(solution)):
        raise RuntimeError("singular finite-difference beam matrix")

    return xi * l_ref, solution[:n] * l_ref
