import math
from dataclasses import replace

import numpy as np
import pytest

from geometry import (
    ConfigError,
    DeviceConfig,
    ElectrodeSegment,
    Material,
    MirrorGeometry,
    SpringGeometry,
    fd_torsion_oracle,
    geometric_max_angle,
    scale_config,
    section_properties,
    torsion_constant,
    validate_config,
)


def make_device(electrodes=None, **overrides) -> DeviceConfig:
    base = DeviceConfig(
        material=Material(youngs_modulus=160e9, shear_modulus=65.6e9),
        spring=SpringGeometry(length=50e-6, width=2e-6, thickness=15e-6),
        mirror=MirrorGeometry(length=490e-6, width=45e-6, thickness=15e-6),
        gap=1.6e-6,
        electrodes=electrodes
        if electrodes is not None
        else [ElectrodeSegment(x_start=0.0, x_end=490e-6, a=1e-6, b=20e-6)],
        name="unit",
    )
    return replace(base, **overrides)


def _paths(err: ConfigError) -> list:
    return [path for path, _ in err.issues]


def test_square_section_torsion_constant():
    t = 3e-6
    assert torsion_constant(t, t) / t**4 == pytest.approx(0.1406, abs=1e-3)


def test_torsion_constant_is_symmetric_in_its_arguments():
    assert torsion_constant(2e-6, 15e-6) == torsion_constant(15e-6, 2e-6)


def test_thin_strip_limit():
    # c t^3 / 3 * (1 - 0.630 t / c) for a long thin strip
    t, c = 1e-6, 100e-6
    expected = c * t**3 / 3.0 * (1.0 - 0.630 * t / c)
    assert torsion_constant(t, c) == pytest.approx(expected, rel=1e-3)


def test_torsion_correction_ratio_is_bounded():
    rng = np.random.default_rng(7)
    for _ in range(200):
        t, w = 10.0 ** rng.uniform(-7.0, -4.0, size=2)
        ratio = torsion_constant(t, w) / (t * w**3 / 3.0)
        assert 0.0 < ratio < 1.0


def test_torsion_series_against_stress_function_fd():
    t = 2e-6
    assert fd_torsion_oracle(t, t, n=80) == pytest.approx(torsion_constant(t, t), rel=5e-3)
    assert fd_torsion_oracle(2e-6, 6e-6, n=40) == pytest.approx(torsion_constant(2e-6, 6e-6), rel=1e-2)


def test_torsion_constant_rejects_bad_input():
    with pytest.raises(ValueError):
        torsion_constant(0.0, 1e-6)
    with pytest.raises(ValueError):
        torsion_constant(1e-6, 1e-6, rel_tol=0.0)


def test_section_properties_formulas():
    cfg = validate_config(make_device())
    props = section_properties(cfg)

    j = torsion_constant(15e-6, 2e-6)
    assert props.j_p == j
    assert props.k_theta == pytest.approx(2.0 * 65.6e9 * j / 50e-6, rel=1e-15)
    assert props.i_spring == pytest.approx(2e-6 * (15e-6) ** 3 / 12.0, rel=1e-15)
    assert props.i_mirror == pytest.approx(45e-6 * (15e-6) ** 3 / 12.0, rel=1e-15)


def test_inertia_override_replaces_mirror_inertia():
    cfg = validate_config(make_device(mirror=MirrorGeometry(490e-6, 45e-6, 15e-6, inertia_override=3.3e-21)))
    assert section_properties(cfg).i_mirror == 3.3e-21


def test_validate_sorts_electrodes_and_allows_adjoining_segments():
    segs = [
        ElectrodeSegment(300e-6, 490e-6, 1e-6, 18e-6),
        ElectrodeSegment(0.0, 120e-6, 1e-6, 18e-6),
        ElectrodeSegment(120e-6, 300e-6, 1e-6, 22e-6),
    ]
    cfg = validate_config(make_device(electrodes=segs))
    assert [e.x_start for e in cfg.electrodes] == [0.0, 120e-6, 300e-6]


def test_validate_reports_every_issue():
    segs = [
        ElectrodeSegment(0.0, 200e-6, 1e-6, 30e-6),      # b beyond half-width
        ElectrodeSegment(150e-6, 300e-6, 10e-6, 5e-6),   # a >= b, overlaps the first
    ]
    bad = make_device(
        electrodes=segs,
        spring=SpringGeometry(length=50e-6, width=2e-6, thickness=-1e-6),
        gap=0.0,
    )
    with pytest.raises(ConfigError) as exc:
        validate_config(bad)

    paths = _paths(exc.value)
    assert "spring.thickness" in paths
    assert "gap" in paths
    assert "electrodes[0].b" in paths
    assert any("a < b violated" in msg for _, msg in exc.value.issues)
    assert any("overlaps" in msg for _, msg in exc.value.issues)


def test_validate_rejects_wide_mirror_and_missing_electrodes():
    with pytest.raises(ConfigError) as exc:
        validate_config(make_device(mirror=MirrorGeometry(100e-6, 200e-6, 15e-6), electrodes=[]))
    messages = [msg for _, msg in exc.value.issues]
    assert any("width < length" in m for m in messages)
    assert "electrodes" in _paths(exc.value)


def test_electrode_must_fit_on_mirror():
    with pytest.raises(ConfigError) as exc:
        validate_config(make_device(electrodes=[ElectrodeSegment(0.0, 500e-6, 0.0, 20e-6)]))
    assert "electrodes[0].x_end" in _paths(exc.value)


def test_geometric_max_angle_uses_widest_electrode():
    segs = [ElectrodeSegment(0.0, 100e-6, 0.0, 16e-6), ElectrodeSegment(100e-6, 490e-6, 0.0, 20e-6)]
    cfg = validate_config(make_device(electrodes=segs))
    assert geometric_max_angle(cfg) == pytest.approx(1.6e-6 / 20e-6, rel=1e-15)
    assert cfg.theta_geo == geometric_max_angle(cfg)


def test_scale_config_scales_lengths_and_stiffness():
    cfg = validate_config(make_device())
    big = scale_config(cfg, 2.0)

    assert big.gap == pytest.approx(2 * cfg.gap)
    assert big.electrodes[0].b == pytest.approx(2 * cfg.electrodes[0].b)
    assert big.material == cfg.material
    assert big.theta_geo == pytest.approx(cfg.theta_geo, rel=1e-14)
    assert big.name == "unit x2"

    # k = 2 G J / L scales with the cube of the length scale
    ratio = section_properties(big).k_theta / section_properties(cfg).k_theta
    assert ratio == pytest.approx(8.0, rel=1e-12)


def test_scale_config_rejects_non_positive_factor():
    with pytest.raises(ValueError):
        scale_config(validate_config(make_device()), 0.0)


def test_total_length():
    cfg = make_device()
    assert cfg.total_length == pytest.approx(590e-6)
    assert math.isclose(cfg.mirror.half_width, 22.5e-6)
