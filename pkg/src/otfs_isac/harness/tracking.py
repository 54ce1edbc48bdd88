"""Sensing-in-the-loop tracking of a single curved ground trajectory.

The user drives a gentle turn with a sinusoidal speed profile.  Every slot
the station senses the range from an echo of the live data frame, rebuilds
the position from the sensed range and the link angles, smooths the raw
track with a centered moving average, and predicts the next-slot state from
the smoothed estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..channel import LinkBudget, PathSet, apply_channel, draw_nlos_paths, \
    los_path_from_kinematics
from ..grids import modulate, random_dd_grid
from ..motion import (MotionState, Track, position_from_spherical,
                      predict_state_kinematic, range_from_delay, smooth_track)
from ..sensing import matched_filter_map
from .config import ScenarioConfig
from .sweep import _mf_delay_bins


@dataclass
class TrackPoint:
    """Per-slot tracking record."""

    t: float
    x_true: float
    y_true: float
    x_est: float
    y_est: float
    x_smooth: float
    y_smooth: float
    d_true: float
    d_est: float
    d_smooth: float
    err_pct_raw: float
    err_pct_smooth: float
    d_pred: float | None = None   # next-slot range predicted from the estimate


def _true_trajectory(cfg: ScenarioConfig, steps: int, t_step: float,
                     speed_mean: float, speed_amp: float,
                     turn_rate: float) -> Track:
    """Curved ground path: constant turn rate, sinusoidal speed profile."""
    pos = position_from_spherical(max(cfg.d1, cfg.d2), azimuth=0.4,
                                  elevation=np.arcsin(
                                      cfg.uav_height / max(cfg.d1, cfg.d2)))
    heading = 2.2
    times, states = [], []
    for k in range(steps):
        t = k * t_step
        speed = speed_mean + speed_amp * np.sin(2 * np.pi * t / (steps * t_step))
        state = MotionState(position=pos.copy(), speed=float(speed),
                            heading=float(heading))
        times.append(t)
        states.append(state)
        pos = pos + state.velocity * t_step
        heading += turn_rate * t_step
    return Track(times=np.array(times), states=states)


def run_tracking(cfg: ScenarioConfig, steps: int = 120, t_step: float = 0.1,
                 speed_mean: float = 11.0, speed_amp: float = 2.0,
                 turn_rate: float = 0.25, window: int = 5,
                 rng: np.random.Generator | None = None) -> list:
    """Track the trajectory with echo sensing each slot; returns TrackPoints."""
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 4)))
    truth = _true_trajectory(cfg, steps, t_step, speed_mean, speed_amp,
                             turn_rate)
    n0 = cfg.n0_for_snr(cfg.snr_db)
    budget = LinkBudget(g_tx=cfg.g_tx, g_rx=cfg.g_rx, carrier=cfg.carrier,
                        n0=n0)

    est_states = []
    for state in truth.states:
        tx = modulate(random_dd_grid(cfg.frame.m, cfg.frame.n, rng),
                      t_symbol=cfg.frame.t_symbol)
        los = los_path_from_kinematics(state, budget, round_trip=True)
        nlos = draw_nlos_paths(cfg.e, los, cfg.nlos_count, rng, cfg.frame,
                               excess_delay_bins=cfg.excess_delay_bins,
                               doppler_fraction=cfg.doppler_fraction) \
            if cfg.e > 0 else []
        rx = apply_channel(tx, PathSet([los] + nlos), state.to_direction(),
                           cfg.array, "comm", rng=rng, n0=n0)
        mf = matched_filter_map(
            rx, tx, num_delay_bins=_mf_delay_bins(cfg, 1.5 * state.range))
        mag = mf.magnitude
        r, _ = np.unravel_index(int(np.argmax(mag)), mag.shape)
        d_hat = range_from_delay(r * mf.delay_bin)
        est_states.append(MotionState(
            position=position_from_spherical(d_hat, state.azimuth,
                                             state.elevation),
            speed=state.speed, heading=state.heading))

    est = Track(times=truth.times.copy(), states=est_states)
    smooth = smooth_track(est, window)

    points = []
    for k in range(steps):
        true_s, est_s, smooth_s = truth.states[k], est.states[k], smooth.states[k]
        d_true, d_est, d_smooth = true_s.range, est_s.range, smooth_s.range
        d_pred = None
        if k + 1 < steps:
            d_pred = predict_state_kinematic(smooth_s, t_step).range
        points.append(TrackPoint(
            t=float(truth.times[k]),
            x_true=float(true_s.position[0]), y_true=float(true_s.position[1]),
            x_est=float(est_s.position[0]), y_est=float(est_s.position[1]),
            x_smooth=float(smooth_s.position[0]),
            y_smooth=float(smooth_s.position[1]),
            d_true=d_true, d_est=d_est, d_smooth=d_smooth,
            err_pct_raw=abs(d_est - d_true) / d_true * 100.0,
            err_pct_smooth=abs(d_smooth - d_true) / d_true * 100.0,
            d_pred=d_pred,
        ))
    return points


def mean_range_error_pct(points) -> float:
    """Mean smoothed range error over the track, in percent."""
    return float(np.mean([p.err_pct_smooth for p in points]))
