import json

import pytest

from config_loader import (
    ENV_LOAD_TOL,
    ENV_MAX_ITER,
    ENV_QUAD_POINTS,
    list_configs,
    load_config,
    options_from_env,
    parse_config,
    resolve_config_path,
)
from geometry import ConfigError


def make_device_dict(**overrides) -> dict:
    data = {
        "name": "tiny",
        "material": {"youngs_modulus_pa": 160e9, "shear_modulus_pa": 65.6e9},
        "spring": {"length_m": 50e-6, "width_m": 2e-6, "thickness_m": 15e-6},
        "mirror": {"length_m": 490e-6, "width_m": 45e-6, "thickness_m": 15e-6},
        "gap_m": 1.6e-6,
        "electrodes": [{"x_start_m": 0.0, "x_end_m": 490e-6, "a_m": 1e-6, "b_m": 20e-6}],
    }
    data.update(overrides)
    return data


def _write(tmp_path, data, name="device.json"):
    path = tmp_path / name
    path.write_text(data if isinstance(data, str) else json.dumps(data), encoding="utf-8")
    return path


def _paths(err: ConfigError) -> list:
    return [path for path, _ in err.issues]


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for name in ("MIRROR_LOAD_TOL", "MIRROR_MAX_ITER", "MIRROR_RELAX", "MIRROR_QUAD_POINTS", "MIRROR_N_JOBS"):
        monkeypatch.delenv(name, raising=False)


def test_reference_config_loads(configs_dir):
    cfg = load_config(configs_dir / "reference.json")
    assert cfg.gap == 1.6e-6
    assert cfg.spring.length == 50e-6
    assert cfg.mirror.length == 490e-6
    assert len(cfg.electrodes) == 3
    assert cfg.notes


def test_defaults_and_name_from_file(tmp_path):
    data = make_device_dict()
    del data["name"]
    cfg = load_config(_write(tmp_path, data, "desk.json"))
    assert cfg.name == "desk"
    assert cfg.material.permittivity == pytest.approx(8.8541878128e-12)
    assert cfg.mirror.inertia_override is None


def test_missing_electrodes_names_the_field(tmp_path):
    data = make_device_dict()
    del data["electrodes"]
    with pytest.raises(ConfigError) as exc:
        load_config(_write(tmp_path, data))
    assert "electrodes" in _paths(exc.value)


def test_negative_thickness_is_rejected(tmp_path):
    data = make_device_dict(spring={"length_m": 50e-6, "width_m": 2e-6, "thickness_m": -15e-6})
    with pytest.raises(ConfigError) as exc:
        load_config(_write(tmp_path, data))
    assert "spring.thickness" in _paths(exc.value)


def test_unknown_keys_are_rejected(tmp_path):
    data = make_device_dict(colour="gold")
    data["material"]["poisson_ratio"] = 0.22
    with pytest.raises(ConfigError) as exc:
        load_config(_write(tmp_path, data))
    paths = _paths(exc.value)
    assert "colour" in paths
    assert "material.poisson_ratio" in paths


def test_parse_error_reports_line_and_column(tmp_path):
    path = _write(tmp_path, '{\n  "gap_m": 1.6e-6,\n  oops\n}')
    with pytest.raises(ConfigError) as exc:
        load_config(path)
    assert exc.value.issues[0][0] == f"{path}:3:3"


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "nope.json")


def test_parse_config_sorts_electrodes():
    data = make_device_dict(
        electrodes=[
            {"x_start_m": 250e-6, "x_end_m": 490e-6, "a_m": 1e-6, "b_m": 18e-6},
            {"x_start_m": 0.0, "x_end_m": 250e-6, "a_m": 1e-6, "b_m": 22e-6},
        ]
    )
    cfg = parse_config(data)
    assert [e.x_start for e in cfg.electrodes] == [0.0, 250e-6]


def test_list_and_resolve_configs(configs_dir, tmp_path):
    names = list_configs(configs_dir)
    assert "reference" in names and "rigid_benchmark" in names
    assert resolve_config_path("reference", configs_dir) == configs_dir / "reference.json"
    assert resolve_config_path("rigid_benchmark.json", configs_dir) == configs_dir / "rigid_benchmark.json"
    with pytest.raises(FileNotFoundError):
        resolve_config_path("missing_device", configs_dir)
    assert list_configs(tmp_path / "empty") == []


def test_options_from_env(monkeypatch):
    monkeypatch.setenv(ENV_LOAD_TOL, "1e-6")
    monkeypatch.setenv(ENV_QUAD_POINTS, "33")
    opts = options_from_env()
    assert opts.load_rel_tol == 1e-6
    assert opts.quadrature.points_per_segment == 33
    assert opts.max_iterations == 100

    # explicit values beat the environment
    opts = options_from_env({"load_rel_tol": 1e-9, "max_iterations": None})
    assert opts.load_rel_tol == 1e-9


def test_options_from_env_rejects_garbage(monkeypatch):
    monkeypatch.setenv(ENV_MAX_ITER, "lots")
    with pytest.raises(ConfigError) as exc:
        options_from_env()
    assert ENV_MAX_ITER in _paths(exc.value)


def test_options_from_env_rejects_even_quadrature():
    with pytest.raises(ConfigError):
        options_from_env({"quad_points": 64})
