"""Radar parameter extraction from echoes.

Matched-filter delay-Doppler maps, greedy peak detection, NLOS-strength
estimation from peak magnitudes, and MUSIC angle estimation on the planar
array.  Estimation is grid-limited: delay bins are one sample wide, Doppler
bins are one over the frame duration, and angles snap to the scan grid.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .arrays import Direction, UpaConfig, steering_phases
from .grids import TimeSeries

_NEIGHBORHOOD = [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)
                 if (dr, dc) != (0, 0)]


@dataclass
class MfMap:
    """Correlation values over (delay bin, Doppler bin).

    Doppler bins follow FFT ordering; doppler_frequencies gives the signed
    frequency of each column.
    """

    values: np.ndarray
    delay_bin: float    # seconds per delay bin
    doppler_bin: float  # Hz per Doppler bin

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def doppler_frequencies(self) -> np.ndarray:
        n = self.values.shape[1]
        return np.fft.fftfreq(n, d=1.0 / (n * self.doppler_bin))


@dataclass
class Detection:
    """Single extracted peak; the earliest-delay detection is flagged LOS."""

    delay: float
    doppler: float
    magnitude: float
    is_los: bool
    delay_idx: int
    doppler_idx: int


@dataclass
class NlosStrengthEstimate:
    """Ratio of summed NLOS peak powers to the LOS peak power."""

    e_hat: float

    def __post_init__(self):
        if self.e_hat < 0:
            raise ValueError("e_hat must be non-negative")


def matched_filter_map(rx: TimeSeries, tx: TimeSeries,
                       num_delay_bins: int | None = None) -> MfMap:
    """Correlate the echo against delayed, Doppler-shifted transmit copies.

    values[d, q] = sum_i rx[i] * conj(tx[i-d]) * exp(-j*2*pi*q*i/L); the
    Doppler sweep per delay bin is a single length-L FFT of the lag product.
    """
    if rx.samples.size != tx.samples.size:
        raise ValueError("rx/tx length mismatch")
    length = tx.samples.size
    if num_delay_bins is None:
        num_delay_bins = tx.m
    products = np.zeros((num_delay_bins, length), dtype=np.complex128)
    for d in range(num_delay_bins):
        if d == 0:
            products[0] = rx.samples * np.conj(tx.samples)
        else:
            products[d, d:] = rx.samples[d:] * np.conj(tx.samples[:-d])
    values = np.fft.fft(products, axis=1)
    return MfMap(
        values=values,
        delay_bin=tx.sample_interval,
        doppler_bin=1.0 / (length * tx.sample_interval),
    )


def _local_maxima(mag: np.ndarray, wrap_cols: bool) -> np.ndarray:
    """Boolean mask of cells >= every neighbor (columns optionally wrap)."""
    mask = np.ones_like(mag, dtype=bool)
    for dr, dc in _NEIGHBORHOOD:
        shifted = np.roll(mag, (dr, dc), axis=(0, 1))
        if dr == 1:
            shifted[0, :] = -np.inf
        elif dr == -1:
            shifted[-1, :] = -np.inf
        if not wrap_cols:
            if dc == 1:
                shifted[:, 0] = -np.inf
            elif dc == -1:
                shifted[:, -1] = -np.inf
        mask &= mag >= shifted
    return mask


def _greedy_peaks(mag: np.ndarray, threshold: float, wrap_cols: bool,
                  max_peaks: int | None = None) -> list:
    """Greedy extraction of local maxima above threshold with a +/-1 guard."""
    candidates = np.argwhere(_local_maxima(mag, wrap_cols) & (mag > threshold))
    order = np.argsort(mag[candidates[:, 0], candidates[:, 1]])[::-1]
    n_cols = mag.shape[1]
    accepted: list = []
    for idx in order:
        r, c = map(int, candidates[idx])
        clash = False
        for ar, ac in accepted:
            dc = abs(c - ac)
            if wrap_cols:
                dc = min(dc, n_cols - dc)
            if abs(r - ar) <= 1 and dc <= 1:
                clash = True
                break
        if not clash:
            accepted.append((r, c))
            if max_peaks is not None and len(accepted) >= max_peaks:
                break
    return accepted


def detect_peaks(mf: MfMap, threshold_rel: float,
                 reference: float | None = None,
                 max_peaks: int | None = None) -> list:
    """Extract detections above threshold_rel times the global maximum.

    reference overrides the map's own maximum as the threshold base (used
    when scanning a residual map against the original peak height).
    """
    if not 0.0 < threshold_rel < 1.0:
        raise ValueError("threshold_rel must lie in (0, 1)")
    mag = mf.magnitude
    if mag.size == 0:
        raise ValueError("empty matched-filter map")
    base = mag.max() if reference is None else reference
    peaks = _greedy_peaks(mag, threshold_rel * base, wrap_cols=True,
                          max_peaks=max_peaks)
    freqs = mf.doppler_frequencies
    detections = [
        Detection(
            delay=r * mf.delay_bin,
            doppler=float(freqs[c]),
            magnitude=float(mag[r, c]),
            is_los=False,
            delay_idx=r,
            doppler_idx=c,
        )
        for r, c in peaks
    ]
    detections.sort(key=lambda det: (det.delay, -det.magnitude))
    if detections:
        detections[0].is_los = True
    return detections


def path_reference(tx: TimeSeries, delay_idx: int,
                   doppler: float) -> np.ndarray:
    """Delayed, Doppler-shifted copy of the transmit waveform (zero-filled)."""
    if delay_idx < 0 or delay_idx >= tx.samples.size:
        raise ValueError(f"delay index {delay_idx} outside the frame")
    ref = np.zeros_like(tx.samples)
    ref[delay_idx:] = tx.samples[:tx.samples.size - delay_idx]
    t = np.arange(tx.samples.size) * tx.sample_interval
    return ref * np.exp(2j * np.pi * doppler * t)


def fit_and_cancel(samples: np.ndarray, tx: TimeSeries, delay_idx: int,
                   doppler: float):
    """Least-squares complex gain of one path, and the echo with it removed.

    Cancelling the dominant path before re-running the matched filter lifts
    weaker paths out of the payload self-noise pedestal (which sits at
    roughly 1/sqrt(M*N) of the main peak for a random payload).
    """
    ref = path_reference(tx, delay_idx, doppler)
    energy = np.vdot(ref, ref).real
    if energy <= 0.0:
        raise ValueError("reference waveform has no energy")
    gain = complex(np.vdot(ref, samples) / energy)
    return gain, samples - gain * ref


def estimate_nlos_strength(detections) -> NlosStrengthEstimate:
    """NLOS-to-LOS power ratio from peak magnitudes."""
    los = [d for d in detections if d.is_los]
    if len(los) != 1:
        raise ValueError("detections must contain exactly one LOS entry")
    los_power = los[0].magnitude ** 2
    nlos_power = sum(d.magnitude**2 for d in detections if not d.is_los)
    return NlosStrengthEstimate(e_hat=nlos_power / los_power)


def estimate_angles(snapshots: np.ndarray, source_count: int, cfg: UpaConfig,
                    grid: float = 0.01,
                    azimuth_range: tuple = (0.0, np.pi / 2),
                    elevation_range: tuple = (-np.pi, np.pi)) -> list:
    """MUSIC direction estimation on (element x snapshot) data.

    Sample covariance -> eigendecomposition -> noise-subspace pseudo-spectrum
    scanned over the angle grid; the noise-subspace projection is evaluated
    through the signal subspace (the steering vectors have unit norm).
    """
    snapshots = np.asarray(snapshots, dtype=np.complex128)
    if snapshots.ndim != 2 or snapshots.shape[0] != cfg.num_elements:
        raise ValueError("snapshots must be (num_elements, num_snapshots)")
    if source_count < 1:
        raise ValueError("source_count must be >= 1")
    n_snap = snapshots.shape[1]
    if n_snap < source_count:
        raise ValueError("covariance rank deficient: fewer snapshots than sources")

    cov = snapshots @ snapshots.conj().T / n_snap
    _, vecs = np.linalg.eigh(cov)
    signal_basis = vecs[:, -source_count:]  # columns span the signal subspace

    az_grid = np.arange(azimuth_range[0], azimuth_range[1] + grid / 2, grid)
    el_grid = np.arange(elevation_range[0], elevation_range[1] + grid / 2, grid)
    pseudo = np.empty((az_grid.size, el_grid.size))
    scale = 1.0 / np.sqrt(cfg.num_elements)
    for i, az in enumerate(az_grid):
        phases = steering_phases(cfg, np.full(el_grid.shape, az), el_grid)
        b = np.exp(1j * phases) * scale          # (n_el_grid, num_elements)
        proj = b @ signal_basis.conj()           # (n_el_grid, source_count)
        noise_power = 1.0 - np.sum(np.abs(proj) ** 2, axis=1)
        pseudo[i] = 1.0 / np.maximum(noise_power, 1e-15)

    wrap = abs((elevation_range[1] - elevation_range[0]) - 2 * np.pi) < 2 * grid
    peaks = _greedy_peaks(pseudo, 0.0, wrap_cols=wrap, max_peaks=source_count)
    peaks.sort(key=lambda rc: -pseudo[rc])
    return [Direction(azimuth=float(az_grid[r]), elevation=float(el_grid[c]))
            for r, c in peaks]


def export_mf_map(mf: MfMap, filename) -> None:
    """CSV dump (delay_bin, doppler_bin, magnitude) for plotting."""
    mag = mf.magnitude
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delay_bin", "doppler_bin", "magnitude"])
        for r in range(mag.shape[0]):
            for c in range(mag.shape[1]):
                writer.writerow([r, c, repr(float(mag[r, c]))])
