from dataclasses import replace

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from beam_mechanics import eval_shape, fd_beam_oracle, max_deflection, solve_beam, zero_shape
from geometry import (
    DeviceConfig,
    ElectrodeSegment,
    Material,
    MirrorGeometry,
    SpringGeometry,
    section_properties,
    validate_config,
)


def make_beam(spring_length=50e-6, mirror_length=500e-6, spring_width=2e-6, mirror_width=45e-6, thickness=15e-6):
    cfg = validate_config(
        DeviceConfig(
            material=Material(youngs_modulus=160e9, shear_modulus=65.6e9),
            spring=SpringGeometry(length=spring_length, width=spring_width, thickness=thickness),
            mirror=MirrorGeometry(length=mirror_length, width=mirror_width, thickness=thickness),
            gap=1.6e-6,
            electrodes=[ElectrodeSegment(0.0, mirror_length, 0.0, 0.4 * mirror_width)],
        )
    )
    return cfg, section_properties(cfg)


def _solve(cfg, props, w):
    return solve_beam(props, cfg.material, cfg.spring, cfg.mirror, w)


def _segment_value(shape, k, s, derivative=0):
    c = shape.coefficients[k]
    for _ in range(derivative):
        c = P.polyder(c)
    return P.polyval(s, c)


def test_springs_shrunk_out_give_clamped_clamped_beam():
    lm = 500e-6
    cfg, props = make_beam(spring_length=1e-12 * lm, mirror_length=lm)
    w = 0.8
    shape = _solve(cfg, props, w)
    ei = cfg.material.youngs_modulus * props.i_mirror
    assert max_deflection(shape) == pytest.approx(w * lm**4 / (384.0 * ei), rel=1e-9)


def test_short_springs_approach_the_clamped_limit():
    lm = 500e-6
    cfg, props = make_beam(spring_length=1e-9 * lm, mirror_length=lm, spring_width=45e-6)
    w = 0.8
    ei = cfg.material.youngs_modulus * props.i_mirror
    # equal EI: the residual spring compliance is 8 L_s / L_m
    assert max_deflection(_solve(cfg, props, w)) == pytest.approx(w * lm**4 / (384.0 * ei), rel=2e-8)


def test_clamped_anchors_and_symmetry(reference_config, reference_props):
    shape = _solve(reference_config, reference_props, 0.4)
    total = shape.total_length
    peak = max_deflection(shape)
    assert peak > 0

    for x in (0.0, total):
        assert abs(eval_shape(shape, x)) < 1e-12 * peak
        assert abs(eval_shape(shape, x, derivative=1)) * total < 1e-10 * peak

    x = np.linspace(0.0, total, 101)
    u = eval_shape(shape, x)
    np.testing.assert_allclose(u, u[::-1], rtol=0, atol=1e-12 * peak)
    assert np.all(u <= peak * (1 + 1e-12))


def test_junction_continuity(reference_config, reference_props):
    shape = _solve(reference_config, reference_props, 0.4)
    ls, lm = reference_config.spring.length, reference_config.mirror.length
    ei = reference_config.material.youngs_modulus * np.array(
        [reference_props.i_spring, reference_props.i_mirror, reference_props.i_spring]
    )
    peak = max_deflection(shape)

    for k, s_end in ((0, ls), (1, lm)):
        # u and u' match
        assert _segment_value(shape, k, s_end) == pytest.approx(_segment_value(shape, k + 1, 0.0), abs=1e-12 * peak)
        assert _segment_value(shape, k, s_end, 1) == pytest.approx(
            _segment_value(shape, k + 1, 0.0, 1), abs=1e-10 * peak / lm
        )
        # bending moment and shear force match
        for d in (2, 3):
            left = ei[k] * _segment_value(shape, k, s_end, d)
            right = ei[k + 1] * _segment_value(shape, k + 1, 0.0, d)
            assert left == pytest.approx(right, rel=1e-9)


def test_fourth_derivative_follows_the_load(reference_config, reference_props):
    w = 0.4
    shape = _solve(reference_config, reference_props, w)
    ei_mirror = reference_config.material.youngs_modulus * reference_props.i_mirror
    x_mirror = reference_config.spring.length + 0.5 * reference_config.mirror.length
    x_spring = 0.5 * reference_config.spring.length
    assert eval_shape(shape, x_mirror, derivative=4) == pytest.approx(w / ei_mirror, rel=1e-12)
    assert eval_shape(shape, x_spring, derivative=4) == 0.0


def test_linear_in_load(reference_config, reference_props):
    one = _solve(reference_config, reference_props, 0.3)
    two = _solve(reference_config, reference_props, 0.6)
    np.testing.assert_allclose(two.coefficients, 2.0 * one.coefficients, rtol=1e-12, atol=0)


def test_zero_load_gives_flat_axis(reference_config, reference_props):
    shape = _solve(reference_config, reference_props, 0.0)
    assert np.all(shape.coefficients == 0.0)
    flat = zero_shape(reference_config.spring, reference_config.mirror)
    assert flat.breakpoints == shape.breakpoints


def test_eval_shape_domain_and_types(reference_config, reference_props):
    shape = _solve(reference_config, reference_props, 0.4)
    assert isinstance(eval_shape(shape, 1e-6), float)
    assert eval_shape(shape, np.array([1e-6, 2e-6])).shape == (2,)
    with pytest.raises(ValueError):
        eval_shape(shape, -1e-6)
    with pytest.raises(ValueError):
        eval_shape(shape, shape.total_length * 1.01)
    with pytest.raises(ValueError):
        eval_shape(shape, 1e-6, derivative=5)


def test_closed_form_matches_fd_oracle_on_random_devices():
    rng = np.random.default_rng(7)
    for _ in range(6):
        cfg, props = make_beam(
            spring_length=rng.uniform(20e-6, 150e-6),
            mirror_length=rng.uniform(200e-6, 800e-6),
            spring_width=rng.uniform(1e-6, 6e-6),
            mirror_width=rng.uniform(30e-6, 120e-6),
            thickness=rng.uniform(3e-6, 20e-6),
        )
        w = rng.uniform(0.1, 2.0)
        shape = _solve(cfg, props, w)
        x, u_fd = fd_beam_oracle(props, cfg.material, cfg.spring, cfg.mirror, w, n_nodes=401)
        u = eval_shape(shape, x)
        peak = np.max(np.abs(u))
        assert np.max(np.abs(u - u_fd)) < 1e-3 * peak


def test_fd_oracle_is_second_order():
    # 50 / 500 / 50 um with 240, 480, 960 cells puts nodes on both junctions
    cfg, props = make_beam(spring_length=50e-6, mirror_length=500e-6)
    w = 1.0
    shape = _solve(cfg, props, w)

    errors = []
    for n in (241, 481, 961):
        x, u_fd = fd_beam_oracle(props, cfg.material, cfg.spring, cfg.mirror, w, n_nodes=n)
        errors.append(np.max(np.abs(eval_shape(shape, x) - u_fd)))

    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders > 1.7)


def test_constant_load_profile_matches_uniform_load(reference_config, reference_props):
    cfg, props = reference_config, reference_props
    w = 0.7
    _, u_uniform = fd_beam_oracle(props, cfg.material, cfg.spring, cfg.mirror, w)
    _, u_profile = fd_beam_oracle(
        props, cfg.material, cfg.spring, cfg.mirror, w, load_profile=lambda x: np.full_like(x, w)
    )
    np.testing.assert_allclose(u_profile, u_uniform, rtol=0, atol=1e-8 * np.max(u_uniform))


def test_load_profiles_superpose(reference_config, reference_props):
    cfg, props = reference_config, reference_props
    w = 0.7
    middle = cfg.spring.length + 0.5 * cfg.mirror.length

    def _solve_profile(profile):
        return fd_beam_oracle(props, cfg.material, cfg.spring, cfg.mirror, w, load_profile=profile)

    x, u_left = _solve_profile(lambda x: np.where(x < middle, w, 0.0))
    _, u_right = _solve_profile(lambda x: np.where(x < middle, 0.0, w))
    _, u_all = fd_beam_oracle(props, cfg.material, cfg.spring, cfg.mirror, w)

    np.testing.assert_allclose(u_left + u_right, u_all, rtol=0, atol=1e-7 * np.max(u_all))
    # mirror images of each other, heavier side sags more
    np.testing.assert_allclose(u_left, u_right[::-1], rtol=0, atol=1e-7 * np.max(u_all))
    assert x[np.argmax(u_left)] < middle


def test_fd_oracle_rejects_coarse_grids(reference_config, reference_props):
    with pytest.raises(ValueError):
        fd_beam_oracle(
            reference_props,
            reference_config.material,
            reference_config.spring,
            reference_config.mirror,
            1.0,
            n_nodes=50,
        )


def test_stiffer_springs_reduce_deflection(reference_config):
    soft = section_properties(reference_config)
    stiff_cfg = replace(reference_config, spring=replace(reference_config.spring, width=6e-6))
    stiff = section_properties(stiff_cfg)
    u_soft = max_deflection(_solve(reference_config, soft, 0.4))
    u_stiff = max_deflection(_solve(stiff_cfg, stiff, 0.4))
    assert u_stiff < u_soft
