"""3D motion topology: sensed delay/Doppler/angles -> range, speed, heading,
next-slot prediction, and moving-average track smoothing.

Coordinate frame: the air base station sits at the origin, users move on a
ground plane below it (z < 0).  Ground azimuth is measured from the +x axis,
elevation is the depression angle of the link, and the heading angle shares
the azimuth reference.  The Cartesian constant-velocity model is the primary
predictor; the triangle-construction range predictor is kept as a
cross-checked reference implementation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .arrays import Direction
from .constants import SPEED_OF_LIGHT


class DegenerateGeometryError(ValueError):
    """Raised when the triangle construction has no valid solution."""


@dataclass(frozen=True)
class MotionState:
    """User kinematic state relative to the base station at the origin."""

    position: np.ndarray  # 3D Cartesian, meters
    speed: float          # m/s, >= 0
    heading: float        # radians, ground-plane angle from +x

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=float)
        if pos.shape != (3,):
            raise ValueError("position must be a 3-vector")
        if self.speed < 0:
            raise ValueError("speed must be non-negative")
        object.__setattr__(self, "position", pos)

    @property
    def range(self) -> float:
        return float(np.linalg.norm(self.position))

    @property
    def azimuth(self) -> float:
        """Ground azimuth of the user seen from the station's nadir point."""
        return float(np.arctan2(self.position[1], self.position[0]))

    @property
    def elevation(self) -> float:
        """Depression angle of the link below horizontal."""
        return float(np.arcsin(-self.position[2] / self.range))

    @property
    def velocity(self) -> np.ndarray:
        return self.speed * np.array(
            [np.cos(self.heading), np.sin(self.heading), 0.0]
        )

    def los_velocity_angle(self) -> float:
        """Angle between the velocity and the user->station line, in [0, pi]."""
        if self.speed == 0:
            return 0.0
        cosang = float(
            self.velocity @ (-self.position) / (self.speed * self.range)
        )
        return float(np.arccos(np.clip(cosang, -1.0, 1.0)))

    def to_direction(self) -> Direction:
        """Beam direction in the planar-array convention (boresight = nadir)."""
        d = self.range
        theta = float(np.arccos(np.clip(-self.position[2] / d, -1.0, 1.0)))
        phi = float(np.arctan2(self.position[0], self.position[1]))
        return Direction(azimuth=theta, elevation=phi)


@dataclass
class Track:
    """Time-ordered sequence of motion-state estimates."""

    times: np.ndarray
    states: list

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.states) != self.times.size:
            raise ValueError("times and states length mismatch")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("timestamps must be strictly increasing")

    @property
    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.states])


def range_from_delay(tau: float) -> float:
    """Round-trip delay to range: d = c*tau/2."""
    if tau < 0:
        raise ValueError("delay must be non-negative")
    return SPEED_OF_LIGHT * tau / 2.0


def _triangle_sides(d, azimuth, elevation, heading):
    """Side lengths of the prediction triangle for the current geometry.

    The triangle joins the station, the user, and the point where the ground
    velocity line crosses the azimuth reference line below the station.
    """
    sin_hd = np.sin(heading)
    if abs(sin_hd) < 1e-12:
        raise DegenerateGeometryError("heading parallel to the reference line")
    r = d * np.cos(elevation)
    height = d * np.sin(elevation)
    d0 = abs(r * np.sin(azimuth) / sin_hd)
    if d0 < 1e-12:
        raise DegenerateGeometryError("user on the reference line")
    d2 = abs(r * np.sin(heading - azimuth) / sin_hd)
    d1 = float(np.hypot(height, d2))
    return d0, d1, d2


def _clamped_arccos(arg: float) -> float:
    if abs(arg) > 1.0 + 1e-9:
        raise DegenerateGeometryError(f"arccos argument {arg} outside [-1, 1]")
    return float(np.arccos(np.clip(arg, -1.0, 1.0)))


def velocity_angle(d: float, azimuth: float, elevation: float,
                   heading: float) -> float:
    """Angle between the user velocity and the station-user line.

    Law-of-cosines solution on the prediction triangle.  Exact (up to the
    0-vs-pi branch of the collinear limit) when the velocity-line crossing
    lies behind the user, i.e. sin(azimuth) and sin(heading) share a sign.
    """
    d0, d1, _ = _triangle_sides(d, azimuth, elevation, heading)
    interior = _clamped_arccos((d * d + d0 * d0 - d1 * d1) / (2.0 * d * d0))
    return float(np.pi - interior)


def speed_from_doppler(nu: float, phi_v: float, carrier: float) -> float:
    """Speed from LOS Doppler and velocity angle: zeta = c*nu/(cos(phi_v)*fc).

    phi_v is measured against the user->station line, so closing motion has
    positive Doppler.  Near-perpendicular geometry is radial-blind and
    raises; callers fall back to the previous speed estimate.
    """
    if abs(np.cos(phi_v)) < 1e-6:
        raise DegenerateGeometryError("radial-blind geometry: cos(phi_v) ~ 0")
    return float(SPEED_OF_LIGHT * nu / (np.cos(phi_v) * carrier))


def turn_angle(d: float, azimuth: float, elevation: float,
               heading: float) -> float:
    """Opening angle of the prediction triangle at the crossing point."""
    d0, d1, _ = _triangle_sides(d, azimuth, elevation, heading)
    if d1 < 1e-12:
        raise DegenerateGeometryError("crossing point coincides with station")
    return _clamped_arccos((d0 * d0 + d1 * d1 - d * d) / (2.0 * d0 * d1))


def range_step(d: float, speed: float, t_otfs: float, phi: float) -> float:
    """One-step range advance of the triangle predictor.

    d_next = sqrt((d + zeta*T - d*sin(phi))^2 + (d*sin(phi))^2); collapses to
    d + zeta*T in the radial limit sin(phi) = 0.
    """
    lateral = d * np.sin(phi)
    return float(np.hypot(d + speed * t_otfs - lateral, lateral))


def predict_range_paper(state: MotionState, t_otfs: float) -> float:
    """Reference range predictor built on the triangle construction.

    Kept as a cross-check only; beam pointing and pre-processing are driven
    by predict_state_kinematic, which stays valid in degenerate geometries.
    """
    phi = turn_angle(state.range, state.azimuth, state.elevation, state.heading)
    return range_step(state.range, state.speed, t_otfs, phi)


def predict_state_kinematic(state: MotionState, t_otfs: float) -> MotionState:
    """Constant-velocity advance on the ground plane (the primary predictor)."""
    return replace(state, position=state.position + state.velocity * t_otfs)


def position_from_spherical(d: float, azimuth: float,
                            elevation: float) -> np.ndarray:
    """Ground-frame Cartesian position from range and link angles."""
    r = d * np.cos(elevation)
    return np.array([r * np.cos(azimuth), r * np.sin(azimuth),
                     -d * np.sin(elevation)])


def smooth_track(track: Track, window: int) -> Track:
    """Centered moving average of track positions; edges shrink the window.

    Timestamps and the speed/heading annotations are left untouched.
    """
    if window < 1 or window % 2 == 0:
        raise ValueError("window must be a positive odd integer")
    n = len(track.states)
    if window > n:
        raise ValueError(f"window {window} exceeds track length {n}")
    half = window // 2
    positions = track.positions
    smoothed_states = []
    for i, state in enumerate(track.states):
        k = min(i, n - 1 - i, half)
        mean_pos = positions[i - k:i + k + 1].mean(axis=0)
        smoothed_states.append(replace(state, position=mean_pos))
    return Track(times=track.times.copy(), states=smoothed_states)
