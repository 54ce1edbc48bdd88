"""Channel model tests: link budget numbers, NLOS statistics, propagation."""

import numpy as np
import pytest

from otfs_isac.arrays import Direction, UpaConfig
from otfs_isac.channel import (LinkBudget, Path, PathSet, apply_channel,
                               draw_nlos_paths, load_paths, los_doppler,
                               los_path_from_kinematics, path_loss,
                               save_paths)
from otfs_isac.constants import SPEED_OF_LIGHT
from otfs_isac.grids import FrameConfig, modulate, random_dd_grid
from otfs_isac.motion import MotionState

BUDGET = LinkBudget(g_tx=1.0, g_rx=1.0, carrier=5e9, n0=1e-3)
FRAME = FrameConfig(m=64, n=64, frame_duration=64 * 64 / 7.5e8)
ARRAY = UpaConfig(8, 8)


def _radial_state(d, speed, outbound=False):
    """Ground user at range d moving along the station-user line."""
    heading = 0.0 if outbound else np.pi
    return MotionState(position=np.array([d, 0.0, 0.0]), speed=speed,
                       heading=heading)


def test_path_loss_reference_value():
    # free-space amplitude gain at 7 m and 5 GHz
    assert path_loss(BUDGET, 7.0) == pytest.approx(4.646e-7, rel=1e-3)


def test_path_loss_inverse_square():
    assert path_loss(BUDGET, 14.0) == pytest.approx(
        path_loss(BUDGET, 7.0) / 4.0, rel=1e-12)
    assert path_loss(BUDGET, 7.0) / path_loss(BUDGET, 15.0) == pytest.approx(
        (15.0 / 7.0) ** 2, rel=1e-12)


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        path_loss(BUDGET, 0.0)


def test_round_trip_delay_and_gain():
    los = los_path_from_kinematics(_radial_state(7.0, 0.0), BUDGET,
                                   round_trip=True)
    assert los.delay == pytest.approx(4.670e-8, rel=1e-3)
    assert abs(los.gain) == pytest.approx(path_loss(BUDGET, 7.0), rel=1e-12)
    one_way = los_path_from_kinematics(_radial_state(7.0, 0.0), BUDGET)
    assert one_way.delay == pytest.approx(los.delay / 2.0, rel=1e-12)


def test_los_doppler_closing_user():
    state = _radial_state(7.0, 10.0)
    nu = los_doppler(state, 5e9)
    assert nu == pytest.approx(10.0 * 5e9 / SPEED_OF_LIGHT, rel=1e-12)
    assert nu == pytest.approx(166.8, rel=1e-3)
    assert los_doppler(state, 5e9, round_trip=True) == pytest.approx(2 * nu)
    outbound = _radial_state(7.0, 10.0, outbound=True)
    assert los_doppler(outbound, 5e9) == pytest.approx(-nu, rel=1e-12)


def test_nlos_zero_strength_draws_zero_gains():
    rng = np.random.default_rng(0)
    los = los_path_from_kinematics(_radial_state(7.0, 0.0), BUDGET,
                                   round_trip=True)
    for p in draw_nlos_paths(0.0, los, 3, rng, FRAME):
        assert p.gain == 0.0
        assert not p.is_los
        assert p.delay > los.delay


def test_nlos_power_calibration():
    # mean total NLOS-to-LOS power ratio converges to e
    rng = np.random.default_rng(1)
    los = los_path_from_kinematics(_radial_state(7.0, 0.0), BUDGET,
                                   round_trip=True)
    e = 0.04
    ratios = []
    for _ in range(5000):
        paths = draw_nlos_paths(e, los, 4, rng, FRAME)
        ratios.append(sum(abs(p.gain) ** 2 for p in paths)
                      / abs(los.gain) ** 2)
    assert np.mean(ratios) == pytest.approx(e, rel=0.02)


def test_nlos_on_grid_and_window():
    rng = np.random.default_rng(2)
    los = los_path_from_kinematics(_radial_state(7.0, 0.0), BUDGET,
                                   round_trip=True)
    ts = FRAME.sample_interval
    for p in draw_nlos_paths(0.1, los, 20, rng, FRAME,
                             excess_delay_bins=(1, 16)):
        excess = (p.delay - los.delay) / ts
        assert 1 <= round(excess) <= 16
        assert abs(excess - round(excess)) < 1e-9
        assert abs(p.doppler / FRAME.doppler_resolution
                   - round(p.doppler / FRAME.doppler_resolution)) < 1e-6


def test_nlos_validation():
    rng = np.random.default_rng(3)
    los = los_path_from_kinematics(_radial_state(7.0, 0.0), BUDGET,
                                   round_trip=True)
    with pytest.raises(ValueError):
        draw_nlos_paths(-0.1, los, 2, rng, FRAME)
    with pytest.raises(ValueError):
        draw_nlos_paths(0.1, los, 0, rng, FRAME)


def test_apply_channel_identity_path():
    rng = np.random.default_rng(4)
    tx = modulate(random_dd_grid(64, 64, rng), t_symbol=FRAME.t_symbol)
    d = Direction(0.5, 0.3)
    path = Path(gain=1.0 + 0j, delay=0.0, doppler=0.0, direction=d,
                is_los=True)
    rx = apply_channel(tx, PathSet([path]), d, ARRAY, "comm")
    assert np.max(np.abs(rx.samples - tx.samples)) < 1e-12
    assert rx.energy == pytest.approx(tx.energy, rel=1e-10)


def test_apply_channel_pure_delay():
    rng = np.random.default_rng(5)
    tx = modulate(random_dd_grid(64, 64, rng), t_symbol=FRAME.t_symbol)
    d = Direction(0.5, 0.3)
    lag = 3
    path = Path(gain=1.0 + 0j, delay=lag * tx.sample_interval, doppler=0.0,
                direction=d, is_los=True)
    rx = apply_channel(tx, PathSet([path]), d, ARRAY, "comm")
    assert np.max(np.abs(rx.samples[lag:] - tx.samples[:-lag])) < 1e-12
    assert np.max(np.abs(rx.samples[:lag])) == 0.0


def test_two_path_energy_ratio():
    # same delay, distinct Doppler: component energies keep the 0.04 ratio
    rng = np.random.default_rng(6)
    tx = modulate(random_dd_grid(64, 64, rng), t_symbol=FRAME.t_symbol)
    d = Direction(0.5, 0.3)
    los = Path(gain=1.0 + 0j, delay=0.0, doppler=0.0, direction=d,
               is_los=True)
    nlos = Path(gain=0.2 + 0j, delay=0.0,
                doppler=3 * FRAME.doppler_resolution, direction=d)
    e_los = apply_channel(tx, [los], d, ARRAY, "comm").energy
    e_nlos = apply_channel(tx, [nlos], d, ARRAY, "comm").energy
    assert e_nlos / e_los == pytest.approx(0.04, abs=1e-10)


def test_noise_calibration():
    # zero paths leave pure noise; per-sample power matches n0 within 1%
    rng = np.random.default_rng(7)
    frame = FrameConfig(m=128, n=128, frame_duration=128 * 128 / 7.5e8)
    tx = modulate(random_dd_grid(128, 128, rng), t_symbol=frame.t_symbol)
    n0 = 2.5e-3
    out = apply_channel(tx, [], Direction(0.0, 0.0), ARRAY, "radar",
                        rng=rng, n0=n0)
    assert out.size >= 1_000_000
    assert np.mean(np.abs(out) ** 2) == pytest.approx(n0, rel=0.01)


def test_radar_mode_shape_and_noise_requires_rng():
    rng = np.random.default_rng(8)
    tx = modulate(random_dd_grid(16, 16, rng), t_symbol=1e-6)
    d = Direction(0.2, 0.1)
    path = Path(gain=1.0, delay=0.0, doppler=0.0, direction=d, is_los=True)
    out = apply_channel(tx, PathSet([path]), d, ARRAY, "radar")
    assert out.shape == (64, 256)
    with pytest.raises(ValueError):
        apply_channel(tx, PathSet([path]), d, ARRAY, "comm", n0=1e-3)
    with pytest.raises(ValueError):
        apply_channel(tx, PathSet([path]), d, ARRAY, "sonar")


def test_apply_channel_rejects_overlong_delay():
    rng = np.random.default_rng(9)
    tx = modulate(random_dd_grid(8, 8, rng), t_symbol=1e-6)
    d = Direction(0.0, 0.0)
    path = Path(gain=1.0, delay=100.0, doppler=0.0, direction=d, is_los=True)
    with pytest.raises(ValueError):
        apply_channel(tx, PathSet([path]), d, ARRAY, "comm")


def test_path_set_invariants():
    d = Direction(0.0, 0.0)
    los = Path(gain=1.0, delay=1e-8, doppler=0.0, direction=d, is_los=True)
    nlos = Path(gain=0.1, delay=2e-8, doppler=0.0, direction=d)
    assert PathSet([nlos, los]).los is los  # reordered LOS-first
    with pytest.raises(ValueError):
        PathSet([nlos])  # no LOS
    with pytest.raises(ValueError):
        PathSet([los, los])  # two LOS
    early = Path(gain=0.1, delay=0.0, doppler=0.0, direction=d)
    with pytest.raises(ValueError):
        PathSet([los, early])  # NLOS precedes LOS


def test_save_load_roundtrip(tmp_path):
    d = Direction(0.4, -0.8)
    los = Path(gain=1.0 - 0.5j, delay=1e-8, doppler=100.0, direction=d,
               is_los=True)
    nlos = Path(gain=0.1 + 0.2j, delay=3e-8, doppler=-50.0,
                direction=Direction(0.41, -0.79))
    path = tmp_path / "paths.csv"
    save_paths(PathSet([los, nlos]), path)
    loaded = load_paths(path)
    assert len(loaded.paths) == 2
    for orig, back in zip((los, nlos), loaded.paths):
        assert back.gain == orig.gain
        assert back.delay == orig.delay
        assert back.doppler == orig.doppler
        assert back.is_los == orig.is_los
        assert back.direction.azimuth == pytest.approx(orig.direction.azimuth)
