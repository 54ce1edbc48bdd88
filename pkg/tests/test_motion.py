"""Motion geometry tests driven by Cartesian oracle scenes."""

import numpy as np
import pytest

from otfs_isac.constants import SPEED_OF_LIGHT
from otfs_isac.motion import (DegenerateGeometryError, MotionState, Track,
                              position_from_spherical, predict_range_paper,
                              predict_state_kinematic, range_from_delay,
                              range_step, smooth_track, speed_from_doppler,
                              velocity_angle)


def test_range_from_delay_values():
    assert range_from_delay(0.0) == 0.0
    assert range_from_delay(4.670e-8) == pytest.approx(7.0, rel=1e-3)
    assert range_from_delay(1.0007e-7) == pytest.approx(15.0, rel=1e-3)
    with pytest.raises(ValueError):
        range_from_delay(-1e-9)


def test_motion_state_derived_quantities():
    state = MotionState(position=np.array([3.0, 4.0, -12.0]), speed=5.0,
                        heading=np.pi / 2)
    assert state.range == pytest.approx(13.0)
    assert state.azimuth == pytest.approx(np.arctan2(4.0, 3.0))
    assert state.elevation == pytest.approx(np.arcsin(12.0 / 13.0))
    assert np.allclose(state.velocity, [0.0, 5.0, 0.0], atol=1e-12)


def test_position_from_spherical_roundtrip():
    rng = np.random.default_rng(0)
    for _ in range(20):
        d = rng.uniform(5, 30)
        az = rng.uniform(-np.pi, np.pi)
        el = rng.uniform(0.05, 1.4)
        state = MotionState(position=position_from_spherical(d, az, el),
                            speed=0.0, heading=0.0)
        assert state.range == pytest.approx(d, abs=1e-9)
        assert state.azimuth == pytest.approx(az, abs=1e-9)
        assert state.elevation == pytest.approx(el, abs=1e-9)


def test_velocity_angle_matches_cartesian_oracle():
    # on non-degenerate scenes the triangle solution reproduces the true
    # angle between the velocity and the user->station line
    rng = np.random.default_rng(1)
    for _ in range(200):
        az = rng.uniform(0.1, np.pi - 0.1)
        hd = rng.uniform(0.1, np.pi - 0.1)
        d = rng.uniform(5, 30)
        el = rng.uniform(0.1, 1.2)
        state = MotionState(position=position_from_spherical(d, az, el),
                            speed=10.0, heading=hd)
        assert velocity_angle(d, az, el, hd) == pytest.approx(
            state.los_velocity_angle(), abs=1e-6)


def test_velocity_angle_perpendicular_and_collinear():
    az = 0.7
    assert velocity_angle(12.0, az, 0.0, az + np.pi / 2) == pytest.approx(
        np.pi / 2, abs=1e-6)
    # outbound along the station-user line
    assert velocity_angle(12.0, az, 0.0, az) == pytest.approx(np.pi,
                                                              abs=1e-6)


def test_velocity_angle_degenerate_geometry():
    with pytest.raises(DegenerateGeometryError):
        velocity_angle(10.0, 0.5, 0.2, 0.0)  # heading on the reference line
    with pytest.raises(DegenerateGeometryError):
        velocity_angle(10.0, 0.0, 0.2, 0.5)  # user on the reference line


def test_speed_from_doppler():
    assert speed_from_doppler(0.0, 0.0, 5e9) == 0.0
    nu = 10.0 * 5e9 / SPEED_OF_LIGHT  # 166.8 Hz at 10 m/s
    assert speed_from_doppler(nu, 0.0, 5e9) == pytest.approx(10.0, rel=1e-9)
    assert speed_from_doppler(nu / 2.0, np.pi / 3, 5e9) == pytest.approx(
        10.0, rel=1e-9)
    with pytest.raises(DegenerateGeometryError):
        speed_from_doppler(100.0, np.pi / 2, 5e9)


def test_predict_state_kinematic():
    state = MotionState(position=np.array([10.0, 0.0, -20.0]), speed=10.0,
                        heading=np.pi / 2)
    nxt = predict_state_kinematic(state, 1.0)
    assert np.allclose(nxt.position, [10.0, 10.0, -20.0], atol=1e-12)
    assert nxt.range == pytest.approx(np.sqrt(600.0))
    # zero speed is the identity
    still = MotionState(position=np.array([3.0, 4.0, 0.0]), speed=0.0,
                        heading=1.0)
    assert np.array_equal(predict_state_kinematic(still, 5.0).position,
                          still.position)
    # constant-velocity semigroup: two half steps equal one full step
    two = predict_state_kinematic(predict_state_kinematic(state, 0.5), 0.5)
    assert np.max(np.abs(two.position - nxt.position)) < 1e-12


def test_range_step_radial_limit():
    assert range_step(12.0, 11.0, 0.1, 0.0) == pytest.approx(13.1, abs=1e-12)


def test_predict_range_paper_on_consistent_scene():
    # near-perpendicular shallow geometry: the triangle construction and the
    # Cartesian predictor agree to a couple of percent
    az, el, d = 3.08, 0.5, 20.0
    state = MotionState(position=position_from_spherical(d, az, el),
                        speed=11.0, heading=az - np.pi / 2)
    d_paper = predict_range_paper(state, 0.1)
    d_kin = predict_state_kinematic(state, 0.1).range
    assert d_paper == pytest.approx(d_kin, rel=0.02)
    # small steps change the range by at most the distance travelled (plus
    # the construction's own bias, bounded on this scene)
    assert abs(d_paper - d) <= state.speed * 0.1 + 0.05


def test_smooth_track_identity_cases():
    times = np.arange(5.0)
    states = [MotionState(position=np.array([1.0, 2.0, -3.0]), speed=1.0,
                          heading=0.0) for _ in times]
    track = Track(times=times, states=states)
    for window in (1, 5):
        out = smooth_track(track, window)
        assert np.max(np.abs(out.positions - track.positions)) < 1e-12


def test_smooth_track_reduces_jitter():
    rng = np.random.default_rng(2)
    times = np.arange(60.0)
    noise = rng.uniform(-0.1, 0.1, size=(60, 3))
    noise[:, 2] = 0.0
    states = [MotionState(position=np.array([0.5 * t, 1.0, -5.0]) + noise[i],
                          speed=0.5, heading=0.0)
              for i, t in enumerate(times)]
    track = Track(times=times, states=states)
    smooth = smooth_track(track, 5)
    clean = np.stack([[0.5 * t, 1.0, -5.0] for t in times])
    rms_raw = np.sqrt(np.mean((track.positions - clean) ** 2))
    rms_smooth = np.sqrt(np.mean((smooth.positions - clean) ** 2))
    assert rms_smooth < rms_raw / 2.0


def test_smooth_track_validation():
    times = np.arange(3.0)
    states = [MotionState(position=np.zeros(3) + i, speed=0.0, heading=0.0)
              for i in times]
    track = Track(times=times, states=states)
    with pytest.raises(ValueError):
        smooth_track(track, 4)  # even window
    with pytest.raises(ValueError):
        smooth_track(track, 5)  # longer than the track


def test_track_requires_increasing_timestamps():
    states = [MotionState(position=np.zeros(3), speed=0.0, heading=0.0)
              for _ in range(2)]
    with pytest.raises(ValueError):
        Track(times=np.array([1.0, 1.0]), states=states)
    with pytest.raises(ValueError):
        Track(times=np.array([0.0]), states=states)
