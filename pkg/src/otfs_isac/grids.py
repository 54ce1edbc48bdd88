"""OTFS modulation chain between delay-Doppler, time-frequency and time domains.

All four transforms are unitary (symmetric 1/sqrt scaling), so energy is
preserved through the whole modulate/demodulate chain.  Sampling is fixed at
rate M*delta_f (sample interval T/M), which turns the synthesis/analysis
maps for rectangular pulses into exact per-slot DFTs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GridShapeError(ValueError):
    """Raised when a grid's declared dimensions disagree with its data."""


@dataclass(frozen=True)
class FrameConfig:
    """OTFS frame geometry and timing.

    m: subcarrier count, n: time-slot count, frame_duration: full frame
    length in seconds (N symbols of duration T = frame_duration / N each).
    """

    m: int = 1024
    n: int = 1024
    frame_duration: float = 4.4e-3

    def __post_init__(self):
        if self.m < 2 or self.n < 2:
            raise ValueError(f"grid dimensions must be >= 2, got {self.m}x{self.n}")
        if self.frame_duration <= 0:
            raise ValueError("frame_duration must be positive")

    @property
    def t_symbol(self) -> float:
        return self.frame_duration / self.n

    @property
    def delta_f(self) -> float:
        return 1.0 / self.t_symbol

    @property
    def sample_interval(self) -> float:
        return self.t_symbol / self.m

    @property
    def num_samples(self) -> int:
        return self.m * self.n

    @property
    def delay_resolution(self) -> float:
        """Seconds per delay bin (= sample interval)."""
        return self.sample_interval

    @property
    def doppler_resolution(self) -> float:
        """Hz per Doppler bin (= 1 / frame duration)."""
        return 1.0 / (self.n * self.t_symbol)


def _check_grid(data: np.ndarray, n: int, m: int, what: str) -> np.ndarray:
    data = np.asarray(data, dtype=np.complex128)
    if data.shape != (n, m):
        raise GridShapeError(
            f"{what} shape {data.shape} does not match declared (N={n}, M={m})"
        )
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{what} contains non-finite entries")
    return data


@dataclass
class DdGrid:
    """Delay-Doppler symbol grid, indexed [doppler k, delay l]."""

    data: np.ndarray
    m: int
    n: int

    def __post_init__(self):
        if self.m < 2 or self.n < 2:
            raise GridShapeError(f"dimensions must be >= 2, got {self.m}x{self.n}")
        self.data = _check_grid(self.data, self.n, self.m, "DdGrid")

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.data) ** 2))


@dataclass
class TfGrid:
    """Time-frequency grid, indexed [time n, frequency m]; T * delta_f = 1."""

    data: np.ndarray
    m: int
    n: int
    t_symbol: float = 1.0

    def __post_init__(self):
        self.data = _check_grid(self.data, self.n, self.m, "TfGrid")
        if self.t_symbol <= 0:
            raise ValueError("t_symbol must be positive")

    @property
    def delta_f(self) -> float:
        return 1.0 / self.t_symbol

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.data) ** 2))


@dataclass
class TimeSeries:
    """Serialized frame waveform: M*N samples at interval T/M."""

    samples: np.ndarray
    m: int
    n: int
    sample_interval: float = 1.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 1 or self.samples.size != self.m * self.n:
            raise GridShapeError(
                f"time series length {self.samples.size} is not M*N = {self.m * self.n}"
            )
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2))

    @property
    def duration(self) -> float:
        return self.samples.size * self.sample_interval


def isfft(dd: DdGrid, t_symbol: float = 1.0) -> TfGrid:
    """Inverse symplectic finite Fourier transform, DD -> TF (unitary).

    X[n, m] = (1/sqrt(NM)) sum_{k,l} x[k, l] exp(j2pi(nk/N - ml/M))
    """
    tf = np.fft.fft(np.fft.ifft(dd.data, axis=0, norm="ortho"), axis=1, norm="ortho")
    return TfGrid(tf, m=dd.m, n=dd.n, t_symbol=t_symbol)


def sfft(tf: TfGrid) -> DdGrid:
    """Symplectic finite Fourier transform, TF -> DD; exact inverse of isfft."""
    dd = np.fft.ifft(np.fft.fft(tf.data, axis=0, norm="ortho"), axis=1, norm="ortho")
    return DdGrid(dd, m=tf.m, n=tf.n)


def heisenberg(tf: TfGrid) -> TimeSeries:
    """TF grid -> waveform for the rectangular transmit pulse.

    Per time slot n the output is the unitary M-point inverse DFT of row n,
    serialized slot by slot (sample i = n*M + m' at t = i * T/M).
    """
    slots = np.fft.ifft(tf.data, axis=1, norm="ortho")
    return TimeSeries(
        slots.reshape(-1), m=tf.m, n=tf.n, sample_interval=tf.t_symbol / tf.m
    )


def wigner(ts: TimeSeries) -> TfGrid:
    """Waveform -> TF grid for the rectangular receive pulse; inverts heisenberg."""
    slots = ts.samples.reshape(ts.n, ts.m)
    tf = np.fft.fft(slots, axis=1, norm="ortho")
    return TfGrid(tf, m=ts.m, n=ts.n, t_symbol=ts.sample_interval * ts.m)


def modulate(dd: DdGrid, t_symbol: float = 1.0) -> TimeSeries:
    """Full OTFS modulator: heisenberg(isfft(x))."""
    return heisenberg(isfft(dd, t_symbol=t_symbol))


def demodulate(ts: TimeSeries) -> DdGrid:
    """Full OTFS demodulator: sfft(wigner(s)); inverts modulate."""
    return sfft(wigner(ts))


def random_dd_grid(m: int, n: int, rng: np.random.Generator) -> DdGrid:
    """Unit-power QPSK symbol grid, the default probing payload."""
    symbols = rng.integers(0, 4, size=(n, m))
    data = np.exp(1j * (np.pi / 4 + np.pi / 2 * symbols))
    return DdGrid(data, m=m, n=n)
