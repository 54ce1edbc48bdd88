"""Uniform planar array steering vectors and beam gains.

Half-wavelength element spacing is baked in.  Element indices run 1..Nx and
1..Ny, matching the literal phase expression; a 0-based reading differs only
by a global phase and does not change any gain magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UpaConfig:
    """Planar array size: nx elements along x, ny along y."""

    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("array dimensions must be >= 1")

    @property
    def num_elements(self) -> int:
        return self.nx * self.ny


@dataclass(frozen=True)
class Direction:
    """Beam direction: azimuth in [-pi/2, pi/2], elevation in (-pi, pi].

    Out-of-range inputs are normalized on construction (azimuth via
    arcsin(sin(.)), elevation wrapped modulo 2pi).
    """

    azimuth: float
    elevation: float

    def __post_init__(self):
        az = float(np.arcsin(np.sin(self.azimuth)))
        el = float(np.angle(np.exp(1j * self.elevation)))
        object.__setattr__(self, "azimuth", az)
        object.__setattr__(self, "elevation", el)


@dataclass
class SteeringVector:
    """Unit-norm per-element phase vector of length nx*ny."""

    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.complex128)
        norm = np.linalg.norm(self.entries)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"steering vector norm {norm} is not 1")


def steering_phases(cfg: UpaConfig, azimuth, elevation) -> np.ndarray:
    """Per-element phase argument pi*sin(az)*(nx*sin(el) + ny*cos(el)).

    Broadcasts over array-valued angles; the element axis is last, ordered
    nx-major (index = (nx-1)*Ny + (ny-1)).
    """
    nx = np.arange(1, cfg.nx + 1)
    ny = np.arange(1, cfg.ny + 1)
    grid = (nx[:, None] * np.sin(elevation)[..., None, None]
            + ny[None, :] * np.cos(elevation)[..., None, None])
    phases = np.pi * np.sin(azimuth)[..., None, None] * grid
    return phases.reshape(*phases.shape[:-2], cfg.num_elements)


def steering(cfg: UpaConfig, direction: Direction) -> SteeringVector:
    """Steering vector for the given direction (serves transmit and receive)."""
    phases = steering_phases(
        cfg, np.asarray(direction.azimuth), np.asarray(direction.elevation)
    )
    entries = np.exp(1j * phases) / np.sqrt(cfg.num_elements)
    return SteeringVector(entries)


def beam_gain(a: SteeringVector, b: SteeringVector) -> complex:
    """Conjugate inner product b^H a; magnitude 1 iff the beams match."""
    if a.entries.shape != b.entries.shape:
        raise ValueError(
            f"steering vector length mismatch: {a.entries.size} vs {b.entries.size}"
        )
    return complex(np.vdot(b.entries, a.entries))
