# config_loader.py
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from electrostatics import QuadratureRule
from equilibrium_solver import SolverOptions
from geometry import (
    VACUUM_PERMITTIVITY,
    ConfigError,
    DeviceConfig,
    ElectrodeSegment,
    Material,
    MirrorGeometry,
    SpringGeometry,
    validate_config,
)

CONFIGS_DIR = Path("configs")

# Optional solver defaults read from the environment (or a .env file)
ENV_LOAD_TOL = "MIRROR_LOAD_TOL"
ENV_MAX_ITER = "MIRROR_MAX_ITER"
ENV_RELAX = "MIRROR_RELAX"
ENV_QUAD_POINTS = "MIRROR_QUAD_POINTS"
ENV_N_JOBS = "MIRROR_N_JOBS"


# -------------------------------------------------------------------
# On-disk schema (SI units, suffixed field names)
# -------------------------------------------------------------------


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MaterialModel(_Strict):
    youngs_modulus_pa: float
    shear_modulus_pa: float
    permittivity_f_per_m: float = VACUUM_PERMITTIVITY


class SpringModel(_Strict):
    length_m: float
    width_m: float
    thickness_m: float


class MirrorModel(_Strict):
    length_m: float
    width_m: float
    thickness_m: float
    inertia_override_m4: Optional[float] = None


class ElectrodeModel(_Strict):
    x_start_m: float
    x_end_m: float
    a_m: float
    b_m: float


class DeviceFile(_Strict):
    name: str = ""
    notes: List[str] = Field(default_factory=list)
    material: MaterialModel
    spring: SpringModel
    mirror: MirrorModel
    gap_m: float
    electrodes: List[ElectrodeModel]

    def to_config(self) -> DeviceConfig:
        return DeviceConfig(
            material=Material(
                youngs_modulus=self.material.youngs_modulus_pa,
                shear_modulus=self.material.shear_modulus_pa,
                permittivity=self.material.permittivity_f_per_m,
            ),
            spring=SpringGeometry(
                length=self.spring.length_m,
                width=self.spring.width_m,
                thickness=self.spring.thickness_m,
            ),
            mirror=MirrorGeometry(
                length=self.mirror.length_m,
                width=self.mirror.width_m,
                thickness=self.mirror.thickness_m,
                inertia_override=self.mirror.inertia_override_m4,
            ),
            gap=self.gap_m,
            electrodes=tuple(
                ElectrodeSegment(x_start=e.x_start_m, x_end=e.x_end_m, a=e.a_m, b=e.b_m)
                for e in self.electrodes
            ),
            name=self.name,
            notes=tuple(self.notes),
        )


# -------------------------------------------------------------------
# Loading
# -------------------------------------------------------------------


def list_configs(configs_dir: Path = CONFIGS_DIR) -> list[str]:
    """
    Returns device config names (file stems) under ./configs
    """
    if not configs_dir.exists():
        return []
    return sorted(p.stem for p in configs_dir.glob("*.json"))


def resolve_config_path(name_or_path: Union[str, Path], configs_dir: Path = CONFIGS_DIR) -> Path:
    """
    A path that exists is used as is; otherwise a bare name is looked up
    as configs/<name>.json.
    """
    path = Path(name_or_path)
    if path.exists():
        return path

    candidate = configs_dir / (path.name if path.suffix == ".json" else f"{path.name}.json")
    if candidate.exists():
        return candidate
    raise FileNotFoundError(f"Missing device config: {name_or_path}")


def parse_config(data: Any, source: str = "<config>") -> DeviceConfig:
    """Validate an already-decoded JSON document."""
    try:
        device = DeviceFile.model_validate(data)
    except ValidationError as e:
        issues = [
            (".".join(str(part) for part in err["loc"]) or source, err["msg"])
            for err in e.errors()
        ]
        raise ConfigError(issues) from e

    if device.name == "":
        device = device.model_copy(update={"name": Path(source).stem})
    return validate_config(device.to_config())


def load_config(path: Union[str, Path]) -> DeviceConfig:
    """
    Loads and validates one device description (JSON). Unknown keys,
    missing fields and broken invariants all raise ConfigError; malformed
    JSON is reported with its line and column.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Missing device config: {path}")

    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError([(f"{path}:{e.lineno}:{e.colno}", e.msg)]) from e

    return parse_config(data, source=str(path))


# -------------------------------------------------------------------
# Solver options from the environment
# -------------------------------------------------------------------


def _env_number(name: str, kind: type, issues: List[tuple]) -> Optional[Any]:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return None
    try:
        return kind(raw.strip())
    except ValueError:
        issues.append((name, f"expected {kind.__name__}, got {raw!r}"))
        return None


def options_from_env(overrides: Optional[Dict[str, Any]] = None) -> SolverOptions:
    """
    SolverOptions built from MIRROR_* environment variables, with explicit
    `overrides` (None values ignored) taking precedence. Call
    dotenv.load_dotenv() first to pick up a .env file.
    """
    issues: List[tuple] = []
    values: Dict[str, Any] = {
        "load_rel_tol": _env_number(ENV_LOAD_TOL, float, issues),
        "max_iterations": _env_number(ENV_MAX_ITER, int, issues),
        "relaxation": _env_number(ENV_RELAX, float, issues),
        "quad_points": _env_number(ENV_QUAD_POINTS, int, issues),
        "n_jobs": _env_number(ENV_N_JOBS, int, issues),
    }
    if issues:
        raise ConfigError(issues)

    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    quad_points = values.pop("quad_points")
    kwargs = {k: v for k, v in values.items() if v is not None}
    try:
        if quad_points is not None:
            kwargs["quadrature"] = QuadratureRule(points_per_segment=int(quad_points))
        return SolverOptions(**kwargs)
    except ValueError as e:
        raise ConfigError([("solver", str(e))]) from e
