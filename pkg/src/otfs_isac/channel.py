"""Parametric multipath delay-Doppler channel.

Builds LOS paths from user kinematics, draws diffuse NLOS paths of a given
relative strength, and applies radar/communication channels to the frame
waveform.  Delays are integer-sample and Dopplers sit on the 1/(N*T) grid by
default, which keeps the downstream estimators exact on synthetic scenes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .arrays import Direction, UpaConfig, steering
from .constants import SPEED_OF_LIGHT
from .grids import FrameConfig, TimeSeries
from .motion import MotionState


@dataclass(frozen=True)
class LinkBudget:
    """Large-scale link parameters: linear antenna gains, carrier, noise power."""

    g_tx: float = 1.0
    g_rx: float = 1.0
    carrier: float = 5e9
    n0: float = 1e-3

    def __post_init__(self):
        for name in ("g_tx", "g_rx", "carrier", "n0"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier


@dataclass
class Path:
    """Single propagation path in the delay-Doppler domain."""

    gain: complex
    delay: float        # seconds, >= 0
    doppler: float      # Hz
    direction: Direction
    is_los: bool = False

    def __post_init__(self):
        if self.delay < 0:
            raise ValueError("path delay must be non-negative")


@dataclass
class PathSet:
    """LOS-first path list; exactly one LOS path, no NLOS arrives earlier."""

    paths: list

    def __post_init__(self):
        los = [p for p in self.paths if p.is_los]
        if len(los) != 1:
            raise ValueError(f"path set needs exactly one LOS path, got {len(los)}")
        if not self.paths[0].is_los:
            self.paths = los + [p for p in self.paths if not p.is_los]
        los_delay = self.paths[0].delay
        for p in self.paths[1:]:
            if p.delay < los_delay:
                raise ValueError("NLOS delay precedes the LOS delay")

    @property
    def los(self) -> Path:
        return self.paths[0]

    @property
    def nlos(self) -> list:
        return self.paths[1:]


def path_loss(budget: LinkBudget, d: float) -> float:
    """Large-scale LOS gain h = G_T*G_R*lambda^2 / ((4*pi)^2 * d^2).

    Rate formulas consume h squared; this returns h itself.
    """
    if d <= 0:
        raise ValueError("distance must be positive")
    lam = budget.wavelength
    return budget.g_tx * budget.g_rx * lam**2 / ((4.0 * np.pi) ** 2 * d**2)


def los_doppler(state: MotionState, carrier: float,
                round_trip: bool = False) -> float:
    """LOS Doppler from kinematics; positive when the user closes in."""
    phi_v = state.los_velocity_angle()
    nu = state.speed * np.cos(phi_v) * carrier / SPEED_OF_LIGHT
    return float(2.0 * nu if round_trip else nu)


def los_path_from_kinematics(state: MotionState, budget: LinkBudget,
                             round_trip: bool = False,
                             rcs: float = 1.0) -> Path:
    """LOS path for the user's current state.

    Radar (round_trip): delay 2d/c, doubled Doppler, reflection amplitude
    h(d)*sqrt(rcs) (two-way path loss with unit default cross-section).
    Communication: delay d/c, one-way Doppler, gain h(d).
    """
    d = state.range
    h = path_loss(budget, d)
    if round_trip:
        delay = 2.0 * d / SPEED_OF_LIGHT
        gain = h * np.sqrt(rcs)
    else:
        delay = d / SPEED_OF_LIGHT
        gain = h
    return Path(
        gain=complex(gain),
        delay=delay,
        doppler=los_doppler(state, budget.carrier, round_trip=round_trip),
        direction=state.to_direction(),
        is_los=True,
    )


def draw_nlos_paths(e: float, los: Path, count: int, rng: np.random.Generator,
                    frame: FrameConfig,
                    excess_delay_bins: tuple = (1, 16),
                    doppler_fraction: float = 0.25,
                    angle_spread: float = 0.02,
                    on_grid: bool = True) -> list:
    """Draw diffuse NLOS paths with total power e*|gain_los|^2.

    Gains are i.i.d. circular Gaussian with the total variance split equally
    across paths.  Excess delays fall in the configured sample window
    (strictly after the LOS) and Dopplers within +/- doppler_fraction of the
    unambiguous limit delta_f/2; on_grid snaps both to the frame lattice.
    Directions scatter within +/- angle_spread of the LOS; the default is a
    tight local cluster that stays inside the array's main beam, so the
    NLOS-to-LOS power ratio survives beamforming essentially intact.
    """
    if e < 0:
        raise ValueError("NLOS strength must be non-negative")
    if count < 1:
        raise ValueError("count must be >= 1")
    sigma2 = e * abs(los.gain) ** 2 / count
    ts = frame.sample_interval
    nu_res = frame.doppler_resolution
    nu_max = doppler_fraction * frame.delta_f / 2.0
    lo, hi = excess_delay_bins
    paths = []
    for _ in range(count):
        g = np.sqrt(sigma2 / 2.0) * (rng.standard_normal()
                                     + 1j * rng.standard_normal())
        if on_grid:
            delay = los.delay + rng.integers(lo, hi + 1) * ts
            doppler = rng.integers(round(-nu_max / nu_res),
                                   round(nu_max / nu_res) + 1) * nu_res
        else:
            delay = los.delay + rng.uniform(lo, hi) * ts
            doppler = rng.uniform(-nu_max, nu_max)
        direction = Direction(
            azimuth=los.direction.azimuth
            + rng.uniform(-angle_spread, angle_spread),
            elevation=los.direction.elevation
            + rng.uniform(-angle_spread, angle_spread),
        )
        paths.append(Path(gain=complex(g), delay=delay, doppler=doppler,
                          direction=direction, is_los=False))
    return paths


def _delayed(samples: np.ndarray, lag: int) -> np.ndarray:
    out = np.zeros_like(samples)
    if lag == 0:
        return samples.copy()
    out[lag:] = samples[:-lag]
    return out


def apply_channel(tx: TimeSeries, paths, tx_dir: Direction, array: UpaConfig,
                  mode: str, rng: np.random.Generator | None = None,
                  n0: float = 0.0):
    """Propagate the transmit waveform through a multipath channel.

    mode "radar": monostatic echo; each path contributes its full per-element
    receive signature times the transmit beam gain, returning an
    (elements, samples) array.  mode "comm": scalar receive chain, returning
    a TimeSeries.  Gaussian noise of per-sample power n0 is added when
    n0 > 0 (radar: per element).
    """
    if mode not in ("radar", "comm"):
        raise ValueError(f"unknown mode {mode!r}")
    path_list = paths.paths if isinstance(paths, PathSet) else list(paths)
    samples = tx.samples
    length = samples.size
    t = np.arange(length) * tx.sample_interval
    a_tx = steering(array, tx_dir).entries

    if mode == "radar":
        out = np.zeros((array.num_elements, length), dtype=np.complex128)
    else:
        out = np.zeros(length, dtype=np.complex128)

    for p in path_list:
        lag = int(round(p.delay / tx.sample_interval))
        if lag >= length:
            raise ValueError(
                f"path delay {p.delay} exceeds the frame duration {tx.duration}"
            )
        contrib = p.gain * _delayed(samples, lag) * np.exp(2j * np.pi * p.doppler * t)
        b = steering(array, p.direction).entries
        gain_tx = np.vdot(b, a_tx)  # b^H a
        if mode == "radar":
            out += (b * gain_tx)[:, None] * contrib[None, :]
        else:
            out += gain_tx * contrib

    if n0 > 0.0:
        if rng is None:
            raise ValueError("rng is required when n0 > 0")
        noise = np.sqrt(n0 / 2.0) * (rng.standard_normal(out.shape)
                                     + 1j * rng.standard_normal(out.shape))
        out = out + noise

    if mode == "comm":
        return TimeSeries(out, m=tx.m, n=tx.n, sample_interval=tx.sample_interval)
    return out


def save_paths(paths: PathSet, filename) -> None:
    """Write one path per record: gain re/im, delay, doppler, angles, LOS flag."""
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gain_re", "gain_im", "delay_s", "doppler_hz",
                         "azimuth_rad", "elevation_rad", "is_los"])
        for p in paths.paths:
            writer.writerow([
                repr(p.gain.real), repr(p.gain.imag), repr(p.delay),
                repr(p.doppler), repr(p.direction.azimuth),
                repr(p.direction.elevation), int(p.is_los),
            ])


def load_paths(filename) -> PathSet:
    """Read a path set written by save_paths."""
    paths = []
    with open(filename, newline="") as fh:
        for row in csv.DictReader(fh):
            paths.append(Path(
                gain=complex(float(row["gain_re"]), float(row["gain_im"])),
                delay=float(row["delay_s"]),
                doppler=float(row["doppler_hz"]),
                direction=Direction(float(row["azimuth_rad"]),
                                    float(row["elevation_rad"])),
                is_los=bool(int(row["is_los"])),
            ))
    return PathSet(paths)
