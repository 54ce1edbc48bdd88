"""Scenario configuration for the simulation harness.

Configs load from INI-style files with sections [frame], [arrays], [users],
[link], [nlos], [qos], [sweep]; every key has a default, so an empty file is
a valid full-scale scenario.  Two scale presets exist: the full-scale frame
(1024 x 1024, 4.4 ms) and a desk preset (64 x 64, nanosecond sampling) sized
so the whole figure suite runs in minutes.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace

import numpy as np

from ..arrays import UpaConfig
from ..channel import LinkBudget, path_loss
from ..grids import FrameConfig

KMPH = 1.0 / 3.6

SWEEP_AXES = ("snr", "e", "speed")


class ConfigError(ValueError):
    """Raised for unreadable or invalid scenario configuration."""


def parse_sweep(text: str) -> np.ndarray:
    """Parse a sweep axis value: "start:step:stop" (inclusive) or a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            start, step, stop = (float(tok) for tok in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            values = np.arange(start, stop + step / 2.0, step)
        elif "," in text:
            values = np.array([float(tok) for tok in text.split(",")])
        else:
            values = np.array([float(text)])
    except ValueError as exc:
        raise ConfigError(f"cannot parse sweep values {text!r}") from exc
    if values.size == 0:
        raise ConfigError(f"sweep {text!r} is empty")
    return values


@dataclass
class ScenarioConfig:
    """Full scenario description; defaults are the full-scale reference setup."""

    frame: FrameConfig = field(default_factory=FrameConfig)
    carrier: float = 5e9
    array: UpaConfig = field(default_factory=lambda: UpaConfig(8, 8))
    # users
    d1: float = 7.0
    d2: float = 15.0
    uav_height: float = 5.0
    speed_min: float = 30.0 * KMPH
    speed_max: float = 60.0 * KMPH
    # link
    g_tx: float = 1.0
    g_rx: float = 1.0
    pt: float = 1.0
    snr_db: float = 30.0
    perfect_csi: bool = False
    # NLOS
    e: float = 0.0
    nlos_count: int = 2
    excess_delay_bins: tuple = (1, 16)
    doppler_fraction: float = 0.25
    threshold_rel: float = 0.02
    # QoS
    r1_min: float = 0.5
    r2_min: float = 0.5
    # protocol overhead: guard band (Doppler rows, delay columns) reserved
    # on the DD grid by the non-sensing variants
    guard: tuple = (30, 60)
    # slot interval between sensing/CSI acquisition and transmission;
    # None means one frame duration
    t_otfs: float | None = None
    # sweep
    sweep_axis: str = "snr"
    sweep_values: np.ndarray = field(
        default_factory=lambda: parse_sweep("0:5:40"))
    # run control
    seed: int = 0
    trials: int = 200
    out_dir: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        positive = {
            "carrier": self.carrier, "d1": self.d1, "d2": self.d2,
            "uav_height": self.uav_height, "speed_min": self.speed_min,
            "speed_max": self.speed_max, "g_tx": self.g_tx, "g_rx": self.g_rx,
            "pt": self.pt, "threshold_rel": self.threshold_rel,
        }
        for key, value in positive.items():
            if value <= 0:
                raise ConfigError(f"{key} must be positive, got {value}")
        if self.speed_max < self.speed_min:
            raise ConfigError("speed_max must be >= speed_min")
        if self.uav_height >= min(self.d1, self.d2):
            raise ConfigError("uav_height must be below the closest user range")
        if self.e < 0 or self.nlos_count < 1:
            raise ConfigError("e must be >= 0 and nlos_count >= 1")
        if self.r1_min < 0 or self.r2_min < 0:
            raise ConfigError("rate floors must be non-negative")
        gd, gl = self.guard
        if gd < 0 or gl < 0 or gd >= self.frame.n or gl >= self.frame.m:
            raise ConfigError(f"guard {self.guard} does not fit the frame")
        if self.t_otfs is not None and self.t_otfs <= 0:
            raise ConfigError("t_otfs must be positive")
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep_axis must be one of {SWEEP_AXES}")
        if np.asarray(self.sweep_values).size == 0:
            raise ConfigError("sweep_values is empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")

    @property
    def budget_reference(self) -> LinkBudget:
        """Link budget at unit noise; n0 is always derived from the SNR."""
        return LinkBudget(g_tx=self.g_tx, g_rx=self.g_rx, carrier=self.carrier,
                          n0=1.0)

    @property
    def snr_reference_gain(self) -> float:
        """|h|^2 at the far user's nominal range, anchoring the SNR axis."""
        return path_loss(self.budget_reference, max(self.d1, self.d2)) ** 2

    def n0_for_snr(self, snr_db: float) -> float:
        return self.pt * self.snr_reference_gain / 10.0 ** (snr_db / 10.0)

    @property
    def overhead_multiplier(self) -> float:
        """Usable-rate fraction left after the guard band of the DD grid."""
        gd, gl = self.guard
        m, n = self.frame.m, self.frame.n
        return 1.0 - (gd * m + gl * n - gd * gl) / (m * n)

    @property
    def slot_interval(self) -> float:
        return self.frame.frame_duration if self.t_otfs is None else self.t_otfs


def desk_preset(cfg: ScenarioConfig) -> ScenarioConfig:
    """Shrink to a 64 x 64 frame with 0.2 m range bins and a scaled guard."""
    frame = FrameConfig(m=64, n=64, frame_duration=64 * 64 / 7.5e8)
    return replace(cfg, frame=frame, guard=(2, 4))


def paper_preset(cfg: ScenarioConfig) -> ScenarioConfig:
    """Restore the full-scale frame and guard band."""
    return replace(cfg, frame=FrameConfig(m=1024, n=1024,
                                          frame_duration=4.4e-3),
                   guard=(30, 60))


def _section(cp: configparser.ConfigParser, name: str) -> dict:
    return dict(cp[name]) if cp.has_section(name) else {}


def _pop(values: dict, section: str, key: str, cast, default):
    if key not in values:
        return default
    raw = values.pop(key)
    try:
        if cast is bool:
            return raw.strip().lower() in ("1", "true", "yes", "on")
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r}") from exc


def load_config(path) -> ScenarioConfig:
    """Load a scenario file, filling omitted keys with the defaults above."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            cp.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"parse error in {path}: {exc}") from exc

    base = ScenarioConfig()
    frame_kv = _section(cp, "frame")
    frame = FrameConfig(
        m=_pop(frame_kv, "frame", "m", int, base.frame.m),
        n=_pop(frame_kv, "frame", "n", int, base.frame.n),
        frame_duration=_pop(frame_kv, "frame", "frame_duration", float,
                            base.frame.frame_duration),
    )
    carrier = _pop(frame_kv, "frame", "carrier", float, base.carrier)
    guard = (_pop(frame_kv, "frame", "guard_doppler", int, base.guard[0]),
             _pop(frame_kv, "frame", "guard_delay", int, base.guard[1]))
    t_otfs = _pop(frame_kv, "frame", "t_otfs", float, base.t_otfs)

    arrays_kv = _section(cp, "arrays")
    array = UpaConfig(nx=_pop(arrays_kv, "arrays", "nx", int, base.array.nx),
                      ny=_pop(arrays_kv, "arrays", "ny", int, base.array.ny))

    users_kv = _section(cp, "users")
    users = dict(
        d1=_pop(users_kv, "users", "d1", float, base.d1),
        d2=_pop(users_kv, "users", "d2", float, base.d2),
        uav_height=_pop(users_kv, "users", "uav_height", float,
                        base.uav_height),
        speed_min=_pop(users_kv, "users", "speed_min_kmph", float,
                       base.speed_min / KMPH) * KMPH,
        speed_max=_pop(users_kv, "users", "speed_max_kmph", float,
                       base.speed_max / KMPH) * KMPH,
    )

    link_kv = _section(cp, "link")
    link = dict(
        g_tx=_pop(link_kv, "link", "g_tx", float, base.g_tx),
        g_rx=_pop(link_kv, "link", "g_rx", float, base.g_rx),
        pt=_pop(link_kv, "link", "pt", float, base.pt),
        snr_db=_pop(link_kv, "link", "snr_db", float, base.snr_db),
        perfect_csi=_pop(link_kv, "link", "perfect_csi", bool,
                         base.perfect_csi),
    )

    nlos_kv = _section(cp, "nlos")
    nlos = dict(
        e=_pop(nlos_kv, "nlos", "e", float, base.e),
        nlos_count=_pop(nlos_kv, "nlos", "path_count", int, base.nlos_count),
        excess_delay_bins=(
            _pop(nlos_kv, "nlos", "excess_delay_min", int,
                 base.excess_delay_bins[0]),
            _pop(nlos_kv, "nlos", "excess_delay_max", int,
                 base.excess_delay_bins[1]),
        ),
        doppler_fraction=_pop(nlos_kv, "nlos", "doppler_fraction", float,
                              base.doppler_fraction),
        threshold_rel=_pop(nlos_kv, "nlos", "threshold_rel", float,
                           base.threshold_rel),
    )

    qos_kv = _section(cp, "qos")
    qos = dict(r1_min=_pop(qos_kv, "qos", "r1_min", float, base.r1_min),
               r2_min=_pop(qos_kv, "qos", "r2_min", float, base.r2_min))

    sweep_kv = _section(cp, "sweep")
    sweep = dict(sweep_axis=base.sweep_axis, sweep_values=base.sweep_values)
    if sweep_kv:
        axis, text = next(iter(sweep_kv.items()))
        if axis not in SWEEP_AXES:
            raise ConfigError(f"[sweep] unknown axis {axis!r}")
        sweep = dict(sweep_axis=axis, sweep_values=parse_sweep(text))

    for section, leftover in (("frame", frame_kv), ("arrays", arrays_kv),
                              ("users", users_kv), ("link", link_kv),
                              ("nlos", nlos_kv), ("qos", qos_kv)):
        if leftover:
            raise ConfigError(
                f"[{section}] unknown key {next(iter(leftover))!r}")

    try:
        return ScenarioConfig(frame=frame, carrier=carrier, array=array,
                              guard=guard, t_otfs=t_otfs,
                              **users, **link, **nlos, **qos, **sweep)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
