"""Planar-array steering vector tests against hand-evaluated geometry."""

import numpy as np
import pytest

from otfs_isac.arrays import (Direction, SteeringVector, UpaConfig, beam_gain,
                              steering)


def test_broadside_steering_is_flat():
    # azimuth 0 zeroes every phase, leaving 1/sqrt(16) per element
    vec = steering(UpaConfig(4, 4), Direction(0.0, 1.234))
    assert np.allclose(vec.entries, 0.25, atol=1e-14)


def test_steering_unit_norm():
    rng = np.random.default_rng(0)
    cfg = UpaConfig(8, 8)
    for _ in range(20):
        d = Direction(rng.uniform(-np.pi / 2, np.pi / 2),
                      rng.uniform(-np.pi, np.pi))
        assert np.linalg.norm(steering(cfg, d).entries) == pytest.approx(
            1.0, abs=1e-12)


def test_two_by_two_hand_phases():
    # phase(nx, ny) = pi*sin(az)*(nx*sin(el) + ny*cos(el)) with 1-based
    # indices; az = pi/6, el = pi/4 gives pi*sqrt(2)/4*(nx+ny)
    vec = steering(UpaConfig(2, 2), Direction(np.pi / 6, np.pi / 4))
    expected = np.exp(1j * np.pi * np.sqrt(2) / 4
                      * np.array([2.0, 3.0, 3.0, 4.0])) / 2.0
    assert np.max(np.abs(vec.entries - expected)) < 1e-12


def test_orthogonal_linear_array_pair():
    # 4-element line with per-element phase increments differing by pi/2:
    # sin(az1) - sin(az2) = 1/2 at el = pi/2 makes the beams orthogonal
    cfg = UpaConfig(4, 1)
    a = steering(cfg, Direction(np.arcsin(0.5), np.pi / 2))
    b = steering(cfg, Direction(0.0, np.pi / 2))
    assert abs(beam_gain(a, b)) < 1e-12


def test_beam_gain_bounded_and_matched():
    rng = np.random.default_rng(1)
    cfg = UpaConfig(8, 8)
    for _ in range(30):
        a = steering(cfg, Direction(rng.uniform(-1.5, 1.5),
                                    rng.uniform(-np.pi, np.pi)))
        b = steering(cfg, Direction(rng.uniform(-1.5, 1.5),
                                    rng.uniform(-np.pi, np.pi)))
        assert abs(beam_gain(a, b)) <= 1.0 + 1e-12
    d = Direction(0.3, -0.7)
    matched = steering(cfg, d)
    assert abs(beam_gain(matched, matched)) == pytest.approx(1.0, abs=1e-12)


def test_beam_gain_reciprocity():
    cfg = UpaConfig(4, 4)
    a = steering(cfg, Direction(0.5, 0.2))
    b = steering(cfg, Direction(0.1, -1.1))
    assert beam_gain(a, b) == pytest.approx(np.conj(beam_gain(b, a)))


def test_gain_continuity_in_angle():
    # finite-difference continuity: a delta-rad perturbation moves the gain
    # by at most O(delta * nx * ny) (phase arguments are that Lipschitz)
    cfg = UpaConfig(8, 8)
    d = Direction(0.4, 0.9)
    base = steering(cfg, d)
    delta = 1e-4
    for daz, del_ in ((delta, 0.0), (0.0, delta)):
        moved = steering(cfg, Direction(d.azimuth + daz, d.elevation + del_))
        step = abs(beam_gain(base, moved) - beam_gain(base, base))
        assert step < 10.0 * delta * cfg.nx * cfg.ny


def test_direction_normalization():
    d = Direction(2.0, 0.0)
    assert d.azimuth == pytest.approx(np.arcsin(np.sin(2.0)))
    assert Direction(0.0, 3 * np.pi).elevation == pytest.approx(np.pi)
    assert Direction(0.0, -np.pi - 0.1).elevation == pytest.approx(
        np.pi - 0.1)


def test_validation_errors():
    with pytest.raises(ValueError):
        UpaConfig(0, 4)
    with pytest.raises(ValueError):
        SteeringVector(np.ones(4))  # norm 2, not unit
    a = steering(UpaConfig(2, 2), Direction(0.0, 0.0))
    b = steering(UpaConfig(3, 3), Direction(0.0, 0.0))
    with pytest.raises(ValueError):
        beam_gain(a, b)
