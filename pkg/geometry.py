# geometry.py
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve


VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m
DEFAULT_SERIES_REL_TOL = 1e-12


# -------------------------------------------------------------------
# Errors
# -------------------------------------------------------------------


class ConfigError(ValueError):
    """
    Raised when a device description breaks one or more invariants.
    `issues` keeps every (field path, message) pair, not just the first one.
    """

    def __init__(self, issues: List[Tuple[str, str]]):
        self.issues = list(issues)
        lines = [f"{path}: {msg}" for path, msg in self.issues]
        super().__init__("invalid device config:\n  " + "\n  ".join(lines))


# -------------------------------------------------------------------
# Device description (SI units throughout)
# -------------------------------------------------------------------


@dataclass(frozen=True)
class Material:
    youngs_modulus: float
    shear_modulus: float
    permittivity: float = VACUUM_PERMITTIVITY


@dataclass(frozen=True)
class SpringGeometry:
    length: float
    width: float
    thickness: float


@dataclass(frozen=True)
class MirrorGeometry:
    length: float
    width: float
    thickness: float
    inertia_override: Optional[float] = None

    @property
    def half_width(self) -> float:
        return 0.5 * self.width


@dataclass(frozen=True)
class ElectrodeSegment:
    """Electrode strip under one half of the mirror, mirror-local x (0 = left end)."""

    x_start: float
    x_end: float
    a: float  # near lateral edge, distance from the rotation axis
    b: float  # far lateral edge

    @property
    def length(self) -> float:
        return self.x_end - self.x_start


@dataclass(frozen=True)
class DeviceConfig:
    material: Material
    spring: SpringGeometry
    mirror: MirrorGeometry
    gap: float
    electrodes: Tuple[ElectrodeSegment, ...]
    name: str = ""
    notes: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        # lists are accepted on construction but stored as tuples
        object.__setattr__(self, "electrodes", tuple(self.electrodes))
        object.__setattr__(self, "notes", tuple(self.notes))

    @property
    def total_length(self) -> float:
        return 2.0 * self.spring.length + self.mirror.length

    @property
    def theta_geo(self) -> float:
        return geometric_max_angle(self)


@dataclass(frozen=True)
class SectionProperties:
    k_theta: float   # N*m/rad
    j_p: float       # m^4
    i_spring: float  # m^4
    i_mirror: float  # m^4


# -------------------------------------------------------------------
# Validation
# -------------------------------------------------------------------


def _check_positive(issues: List[Tuple[str, str]], path: str, value) -> None:
    if value is None or not np.isfinite(value) or value <= 0:
        issues.append((path, f"must be a positive finite number (got {value!r})"))


def validate_config(raw: DeviceConfig) -> DeviceConfig:
    """
    Check every invariant of the device description and return it with the
    electrodes sorted by x_start. All violations are reported together.
    """
    issues: List[Tuple[str, str]] = []

    _check_positive(issues, "material.youngs_modulus", raw.material.youngs_modulus)
    _check_positive(issues, "material.shear_modulus", raw.material.shear_modulus)
    _check_positive(issues, "material.permittivity", raw.material.permittivity)

    for name in ("length", "width", "thickness"):
        _check_positive(issues, f"spring.{name}", getattr(raw.spring, name))
        _check_positive(issues, f"mirror.{name}", getattr(raw.mirror, name))

    if raw.mirror.inertia_override is not None:
        _check_positive(issues, "mirror.inertia_override", raw.mirror.inertia_override)

    mirror_ok = raw.mirror.length > 0 and raw.mirror.width > 0
    if mirror_ok and not raw.mirror.width < raw.mirror.length:
        issues.append(("mirror.width", "width < length violated (narrow-strip model)"))

    _check_positive(issues, "gap", raw.gap)

    if not raw.electrodes:
        issues.append(("electrodes", "at least one electrode segment is required"))

    half_width = raw.mirror.half_width
    for i, seg in enumerate(raw.electrodes):
        path = f"electrodes[{i}]"
        if not 0.0 <= seg.x_start < seg.x_end:
            issues.append((path, f"0 <= x_start < x_end violated ({seg.x_start!r}, {seg.x_end!r})"))
        if mirror_ok and seg.x_end > raw.mirror.length:
            issues.append((f"{path}.x_end", f"exceeds mirror length {raw.mirror.length!r}"))
        if seg.a < 0:
            issues.append((f"{path}.a", "must be >= 0"))
        if not seg.a < seg.b:
            issues.append((path, "a < b violated"))
        if mirror_ok and seg.b > half_width:
            issues.append((f"{path}.b", f"exceeds mirror half-width {half_width!r}"))

    ordered = sorted(enumerate(raw.electrodes), key=lambda item: item[1].x_start)
    for (i_prev, prev), (i_next, nxt) in zip(ordered, ordered[1:]):
        # adjoining segments (x_end == x_start) are allowed
        if nxt.x_start < prev.x_end:
            issues.append((f"electrodes[{i_next}]", f"overlaps electrodes[{i_prev}] in x"))

    if issues:
        raise ConfigError(issues)

    return replace(raw, electrodes=tuple(seg for _, seg in ordered))


# -------------------------------------------------------------------
# Section properties
# -------------------------------------------------------------------


def torsion_constant(thickness: float, width: float, rel_tol: float = DEFAULT_SERIES_REL_TOL) -> float:
    """
    Saint-Venant torsion constant of a solid rectangle (m^4).

    Written on the long/short sides so the result does not depend on which
    argument is the thickness:
        J = c_long * c_short^3 / 3 * (1 - 192 c_short / (pi^5 c_long) * sum_odd tanh(i pi c_long / 2 c_short) / i^5)
    The odd-index series stops once a term moves the sum by less than rel_tol.
    """
    if not (thickness > 0 and width > 0):
        raise ValueError(f"thickness and width must be positive (got {thickness!r}, {width!r})")
    if not 0 < rel_tol < 1:
        raise ValueError(f"rel_tol must lie in (0, 1) (got {rel_tol!r})")

    c_long, c_short = max(thickness, width), min(thickness, width)
    aspect = c_long / c_short

    total = 0.0
    i = 1
    while True:
        term = math.tanh(i * math.pi * aspect / 2.0) / i**5
        total += term
        if term < rel_tol * total:
            break
        i += 2

    correction = 192.0 / (math.pi**5 * aspect) * total
    return c_long * c_short**3 * (1.0 - correction) / 3.0


def torsional_stiffness(material: Material, spring: SpringGeometry, j_p: float) -> float:
    """Restoring torque per radian of the two springs: 2 G J_p / L_s."""
    return 2.0 * material.shear_modulus * j_p / spring.length


def section_properties(config: DeviceConfig, rel_tol: float = DEFAULT_SERIES_REL_TOL) -> SectionProperties:
    spring, mirror = config.spring, config.mirror

    j_p = torsion_constant(spring.thickness, spring.width, rel_tol)
    k_theta = torsional_stiffness(config.material, spring, j_p)

    # bending about the horizontal axis: width * thickness^3 / 12
    i_spring = spring.width * spring.thickness**3 / 12.0
    if mirror.inertia_override is not None:
        i_mirror = float(mirror.inertia_override)
    else:
        i_mirror = mirror.width * mirror.thickness**3 / 12.0

    return SectionProperties(k_theta=k_theta, j_p=j_p, i_spring=i_spring, i_mirror=i_mirror)


def geometric_max_angle(config: DeviceConfig) -> float:
    """Tilt at which the far electrode edge would reach the electrode plane: gap / max(b)."""
    return config.gap / max(seg.b for seg in config.electrodes)


def scale_config(config: DeviceConfig, factor: float) -> DeviceConfig:
    """Uniformly scale every length of a device; the material is unchanged."""
    if not factor > 0:
        raise ValueError(f"scale factor must be positive (got {factor!r})")

    s = float(factor)
    inertia = config.mirror.inertia_override
    scaled = replace(
        config,
        spring=SpringGeometry(
            length=config.spring.length * s,
            width=config.spring.width * s,
            thickness=config.spring.thickness * s,
        ),
        mirror=MirrorGeometry(
            length=config.mirror.length * s,
            width=config.mirror.width * s,
            thickness=config.mirror.thickness * s,
            inertia_override=None if inertia is None else inertia * s**4,
        ),
        gap=config.gap * s,
        electrodes=tuple(
            ElectrodeSegment(x_start=e.x_start * s, x_end=e.x_end * s, a=e.a * s, b=e.b * s)
            for e in config.electrodes
        ),
        name=f"{config.name} x{s:g}" if config.name else f"x{s:g}",
    )
    return validate_config(scaled)


# -------------------------------------------------------------------
# Finite-difference torsion oracle
# -------------------------------------------------------------------


def fd_torsion_oracle(thickness: float, width: float, n: int = 60) -> float:
    """
    Torsion constant from the Prandtl stress function on a rectangle:
    laplacian(phi) = -2 inside, phi = 0 on the boundary, J = 2 * integral(phi).
    `n` interior nodes along the short side; the long side gets the same spacing
    (rounded). Second-order accurate, used to cross-check torsion_constant.
    """
    if n < 4:
        raise ValueError("n must be >= 4")

    c_long, c_short = max(thickness, width), min(thickness, width)
    n_short = int(n)
    n_long = max(n_short, int(round((n_short + 1) * c_long / c_short)) - 1)
    h_short = c_short / (n_short + 1)
    h_long = c_long / (n_long + 1)

    def _second_difference(m: int, h: float) -> sp.csr_matrix:
        return sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(m, m), format="csr") / h**2

    lap = sp.kron(sp.identity(n_short), _second_difference(n_long, h_long)) + sp.kron(
        _second_difference(n_short, h_short), sp.identity(n_long)
    )
    phi = spsolve(lap.tocsc(), np.full(n_short * n_long, -2.0))

    # boundary values are zero, so the trapezoid rule reduces to a plain sum
    return float(2.0 * phi.sum() * h_short * h_long)
