"""Monte Carlo sweeps over SNR, NLOS strength and user speed.

Each trial synthesizes two ground users seen from the air station, senses
their ranges from an echo of the actual data frame (for the sensing-assisted
variant), allocates NOMA powers from the estimated gains, and scores the
allocation against the true gains at transmission time.  Three system
variants are compared:

- noma_isac: pilot-free frames; CSI from echo sensing plus motion prediction.
- noma_no_sensing: guard-band pilots (rate overhead) and CSI one slot stale.
- oma_no_sensing: orthogonal time-split baseline with the same overhead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..allocation import (ChannelGains, PowerAllocation, QosSpec,
                          mmf_imperfect, mmf_perfect, rates_bound,
                          rates_perfect, sr_imperfect, sr_perfect)
from ..arrays import steering
from ..channel import (LinkBudget, PathSet, apply_channel, draw_nlos_paths,
                       los_path_from_kinematics, path_loss)
from ..constants import SPEED_OF_LIGHT
from ..grids import TimeSeries, modulate, random_dd_grid
from ..motion import (MotionState, position_from_spherical,
                      predict_state_kinematic, range_from_delay)
from ..sensing import detect_peaks, fit_and_cancel, matched_filter_map
from .config import KMPH, ScenarioConfig, parse_sweep

VARIANTS = ("noma_isac", "noma_no_sensing", "oma_no_sensing")
OBJECTIVES = ("mmf", "sr")


@dataclass
class TrialResult:
    """One scored system variant for one Monte Carlo draw."""

    figure: int
    objective: str
    variant: str
    snr_db: float
    e: float
    speed: float        # swept coordinate in m/s; 0 when speeds are random
    trial: int
    r1: float
    r2: float
    w1: float | None
    w2: float | None
    rate_metric: float
    feasible: bool
    tau_hat: float | None = None
    nu_hat: float | None = None
    e_hat: float | None = None
    range_err_pct: float | None = None

    def sort_key(self):
        return (self.figure, self.objective, self.variant, self.snr_db,
                self.e, self.speed, self.trial)


@dataclass
class _Sensing:
    d_hat: float
    tau_hat: float
    nu_hat: float
    e_hat: float
    range_err_pct: float


def _mf_delay_bins(cfg: ScenarioConfig, max_range: float) -> int:
    """Delay bins covering the round trip to max_range plus the NLOS window."""
    ts = cfg.frame.sample_interval
    lag = int(np.ceil(2.0 * max_range / (SPEED_OF_LIGHT * ts)))
    return min(cfg.frame.num_samples, lag + cfg.excess_delay_bins[1] + 8)


def _sense_user(cfg: ScenarioConfig, state: MotionState, budget: LinkBudget,
                e: float, tx, rng: np.random.Generator) -> _Sensing:
    """Echo -> matched filter -> LOS range and NLOS strength for one user."""
    los = los_path_from_kinematics(state, budget, round_trip=True)
    nlos = draw_nlos_paths(e, los, cfg.nlos_count, rng, cfg.frame,
                           excess_delay_bins=cfg.excess_delay_bins,
                           doppler_fraction=cfg.doppler_fraction)
    rx = apply_channel(tx, PathSet([los] + nlos), state.to_direction(),
                       cfg.array, "comm", rng=rng, n0=budget.n0)
    num_bins = _mf_delay_bins(cfg, 1.5 * state.range)
    mf = matched_filter_map(rx, tx, num_delay_bins=num_bins)
    mag = mf.magnitude
    r, c = np.unravel_index(int(np.argmax(mag)), mag.shape)
    tau = r * mf.delay_bin
    d_hat = range_from_delay(tau)
    # NLOS strength by successive cancellation: remove the LOS, then detect
    # and fit the NLOS peaks inside the excess-delay window on the residual
    g_los, residual = fit_and_cancel(rx.samples, tx, r,
                                     float(mf.doppler_frequencies[c]))
    window_hi = r + cfg.excess_delay_bins[1]
    nlos_power = 0.0
    if e > 0.0:
        mf2 = matched_filter_map(
            TimeSeries(residual, m=tx.m, n=tx.n,
                       sample_interval=tx.sample_interval),
            tx, num_delay_bins=num_bins)
        dets = detect_peaks(mf2, cfg.threshold_rel, reference=mag[r, c],
                            max_peaks=4 * cfg.nlos_count)
        samples = residual
        for det in sorted(dets, key=lambda d: -d.magnitude):
            if not r < det.delay_idx <= window_hi:
                continue
            g, samples = fit_and_cancel(samples, tx, det.delay_idx,
                                        det.doppler)
            nlos_power += abs(g) ** 2
    return _Sensing(
        d_hat=d_hat,
        tau_hat=tau,
        nu_hat=float(mf.doppler_frequencies[c]),
        e_hat=min(nlos_power / abs(g_los) ** 2, 1.0),
        range_err_pct=abs(d_hat - state.range) / state.range * 100.0,
    )


def _ground_state(cfg: ScenarioConfig, d: float, speed: float,
                  rng: np.random.Generator) -> MotionState:
    azimuth = rng.uniform(-np.pi, np.pi)
    heading = rng.uniform(-np.pi, np.pi)
    r = np.sqrt(d * d - cfg.uav_height**2)
    position = np.array([r * np.cos(azimuth), r * np.sin(azimuth),
                         -cfg.uav_height])
    return MotionState(position=position, speed=speed, heading=heading)


def _pointing_loss(array, aimed_state: MotionState,
                   true_state: MotionState) -> float:
    """Beam power factor when aiming at the believed user position.

    This is where outdated CSI actually hurts: a position gap steers the
    beam off the user, scaling the effective channel gain by
    |b(true)^H a(aimed)|^2 <= 1.
    """
    a = steering(array, aimed_state.to_direction()).entries
    b = steering(array, true_state.to_direction()).entries
    return float(abs(np.vdot(b, a)) ** 2)


def _allocate(objective: str, g: ChannelGains, qos: QosSpec, bound: str):
    if objective == "mmf":
        return mmf_perfect(g) if bound == "perfect" else mmf_imperfect(g, bound)
    return (sr_perfect(g, qos) if bound == "perfect"
            else sr_imperfect(g, qos, bound))


def _achieved(g_true: ChannelGains, alloc: PowerAllocation, bound: str):
    if bound == "perfect":
        return rates_perfect(g_true, alloc)
    return rates_bound(g_true, alloc, bound)


def _metric(objective: str, r1: float, r2: float) -> float:
    return min(r1, r2) if objective == "mmf" else r1 + r2


def _run_trial(cfg: ScenarioConfig, figure: int, point_idx: int, trial: int,
               snr_db: float, e: float, speed_coord: float | None,
               objectives, variants) -> list:
    rng = np.random.default_rng(
        np.random.SeedSequence((cfg.seed, point_idx, trial)))
    n0 = cfg.n0_for_snr(snr_db)
    budget = LinkBudget(g_tx=cfg.g_tx, g_rx=cfg.g_rx, carrier=cfg.carrier,
                        n0=n0)
    qos = QosSpec(r1_min=cfg.r1_min, r2_min=cfg.r2_min)
    d_weak, d_strong = max(cfg.d1, cfg.d2), min(cfg.d1, cfg.d2)
    if speed_coord is None:
        speeds = rng.uniform(cfg.speed_min, cfg.speed_max, size=2)
    else:
        speeds = (speed_coord, speed_coord)
    state0 = {"weak": _ground_state(cfg, d_weak, float(speeds[0]), rng),
              "strong": _ground_state(cfg, d_strong, float(speeds[1]), rng)}
    t_slot = cfg.slot_interval
    state1 = {k: predict_state_kinematic(s, t_slot)
              for k, s in state0.items()}
    h_true = {k: path_loss(budget, s.range) ** 2 for k, s in state1.items()}
    h_stale = {k: path_loss(budget, s.range) ** 2 for k, s in state0.items()}
    bound = "perfect" if e == 0.0 else "lower"

    short_circuit = cfg.perfect_csi and e == 0.0
    sensing = None
    if "noma_isac" in variants and not short_circuit:
        tx = modulate(random_dd_grid(cfg.frame.m, cfg.frame.n, rng),
                      t_symbol=cfg.frame.t_symbol)
        sensing = {k: _sense_user(cfg, state0[k], budget, e, tx, rng)
                   for k in ("weak", "strong")}
    h_pred, e_hat, predicted = h_true, 0.0, state1
    if sensing is not None:
        predicted = {
            k: predict_state_kinematic(
                MotionState(
                    position=position_from_spherical(
                        sensing[k].d_hat, state0[k].azimuth,
                        state0[k].elevation),
                    speed=state0[k].speed, heading=state0[k].heading),
                t_slot)
            for k in ("weak", "strong")
        }
        h_pred = {k: path_loss(budget, s.range) ** 2
                  for k, s in predicted.items()}
        e_hat = (sensing["weak"].e_hat + sensing["strong"].e_hat) / 2.0
    # per-user beam power factor at transmission time, per pointing policy
    point_isac = {k: _pointing_loss(cfg.array, predicted[k], state1[k])
                  for k in ("weak", "strong")}
    point_stale = {k: _pointing_loss(cfg.array, state0[k], state1[k])
                   for k in ("weak", "strong")}

    speed_col = 0.0 if speed_coord is None else speed_coord
    rows = []
    for objective in objectives:
        for variant in variants:
            mult = 1.0 if variant == "noma_isac" else cfg.overhead_multiplier
            point = point_isac if variant == "noma_isac" else point_stale
            h_eff = {k: h_true[k] * point[k] for k in ("weak", "strong")}
            tau = nu = ehat_col = err = None
            if variant == "oma_no_sensing":
                s_weak = cfg.pt * h_eff["weak"] / (e * cfg.pt * h_eff["weak"] + n0)
                s_strong = cfg.pt * h_eff["strong"] / (e * cfg.pt * h_eff["strong"] + n0)
                r1 = 0.5 * float(np.log2(1 + s_weak)) * mult
                r2 = 0.5 * float(np.log2(1 + s_strong)) * mult
                w1 = w2 = None
                feasible = True
            else:
                if variant == "noma_isac":
                    h_est = h_pred
                    e_alloc = e if sensing is None else e_hat
                    if sensing is not None:
                        st = sensing["strong"]
                        tau, nu = st.tau_hat, st.nu_hat
                        ehat_col, err = e_hat, st.range_err_pct
                else:
                    h_est, e_alloc = h_stale, e
                g_est = ChannelGains(h1_sq=h_est["weak"], h2_sq=h_est["strong"],
                                     n0=n0, pt=cfg.pt,
                                     e=0.0 if bound == "perfect" else e_alloc)
                report = _allocate(objective, g_est, qos, bound)
                feasible = report.feasible
                if not feasible or report.allocation is None:
                    r1 = r2 = 0.0
                    w1 = w2 = None
                else:
                    alloc = report.allocation
                    if g_est.swapped:
                        alloc = PowerAllocation(w1=alloc.w2, w2=alloc.w1)
                    g_true = ChannelGains(h1_sq=h_eff["weak"],
                                          h2_sq=h_eff["strong"],
                                          n0=n0, pt=cfg.pt, e=e)
                    if g_true.swapped:
                        alloc = PowerAllocation(w1=alloc.w2, w2=alloc.w1)
                    r1, r2 = _achieved(g_true, alloc, bound)
                    r1, r2 = r1 * mult, r2 * mult
                    w1, w2 = alloc.w1, alloc.w2
            rows.append(TrialResult(
                figure=figure, objective=objective, variant=variant,
                snr_db=snr_db, e=e, speed=speed_col, trial=trial,
                r1=r1, r2=r2, w1=w1, w2=w2,
                rate_metric=_metric(objective, r1, r2), feasible=feasible,
                tau_hat=tau, nu_hat=nu, e_hat=ehat_col, range_err_pct=err,
            ))
    return rows


def _run_axis(cfg: ScenarioConfig, figure: int, axis: str, values,
              objectives, variants) -> list:
    results = []
    for point_idx, value in enumerate(np.asarray(values, dtype=float)):
        snr = value if axis == "snr" else cfg.snr_db
        e = value if axis == "e" else cfg.e
        speed = value * KMPH if axis == "speed" else None
        for trial in range(cfg.trials):
            results.extend(_run_trial(cfg, figure, point_idx, trial,
                                      float(snr), float(e), speed,
                                      objectives, variants))
    return results


def run_sweep(cfg: ScenarioConfig, objectives=("mmf",),
              variants=VARIANTS, figure: int = 0) -> list:
    """Monte Carlo run over the config's own sweep axis."""
    return _run_axis(cfg, figure, cfg.sweep_axis, cfg.sweep_values,
                     objectives, variants)


def closed_form_curves(cfg: ScenarioConfig, e_values=None) -> list:
    """Analytic rate-bound curves vs NLOS strength at the nominal geometry.

    No Monte Carlo: one row per (objective, bound, e).  The upper/lower pairs
    converge at e = 0.  For the MMF upper bound the plotted point is the
    grid-oracle optimum; the literal closed-form split is recorded in the
    power columns (its divergence is an allocator-level report, see
    mmf_imperfect).
    """
    if e_values is None:
        e_values = parse_sweep("0:0.02:0.1")
    n0 = cfg.n0_for_snr(cfg.snr_db)
    h1 = path_loss(LinkBudget(cfg.g_tx, cfg.g_rx, cfg.carrier, n0),
                   max(cfg.d1, cfg.d2)) ** 2
    h2 = path_loss(LinkBudget(cfg.g_tx, cfg.g_rx, cfg.carrier, n0),
                   min(cfg.d1, cfg.d2)) ** 2
    qos = QosSpec(r1_min=cfg.r1_min, r2_min=cfg.r2_min)
    rows = []
    for e in np.asarray(e_values, dtype=float):
        g = ChannelGains(h1_sq=h1, h2_sq=h2, n0=n0, pt=cfg.pt, e=float(e))
        for objective in OBJECTIVES:
            for bound in ("perfect", "lower", "upper"):
                report = _allocate(objective, g, qos, bound)
                r1, r2 = report.r1, report.r2
                alloc = report.allocation
                if (objective == "mmf" and bound == "upper"
                        and report.oracle_allocation is not None):
                    r1, r2 = rates_bound(g, report.oracle_allocation, "upper")
                rows.append(TrialResult(
                    figure=7, objective=objective, variant=bound,
                    snr_db=cfg.snr_db, e=float(e), speed=0.0, trial=0,
                    r1=r1, r2=r2,
                    w1=None if alloc is None else alloc.w1,
                    w2=None if alloc is None else alloc.w2,
                    rate_metric=_metric(objective, r1, r2),
                    feasible=report.feasible,
                ))
    return rows


def run_figure(cfg: ScenarioConfig, figure: int, variants=VARIANTS) -> list:
    """Produce the Monte Carlo rows behind one of the report figures (5-9)."""
    from dataclasses import replace

    if figure == 5:
        values = (cfg.sweep_values if cfg.sweep_axis == "snr"
                  else parse_sweep("0:5:40"))
        return _run_axis(cfg, 5, "snr", values, ("mmf",), variants)
    if figure == 6:
        values = (cfg.sweep_values if cfg.sweep_axis == "snr"
                  else parse_sweep("0:5:40"))
        return _run_axis(cfg, 6, "snr", values, ("sr",), variants)
    if figure == 7:
        return closed_form_curves(cfg)
    if figure == 8:
        values = (cfg.sweep_values if cfg.sweep_axis == "e"
                  else parse_sweep("0:0.02:0.1"))
        return _run_axis(cfg, 8, "e", values, OBJECTIVES, variants)
    if figure == 9:
        values = (cfg.sweep_values if cfg.sweep_axis == "speed"
                  else parse_sweep("30:10:60"))   # km/h
        cfg9 = replace(cfg, e=0.02,
                       t_otfs=0.1 if cfg.t_otfs is None else cfg.t_otfs)
        legs = tuple(v for v in variants if v != "oma_no_sensing")
        return _run_axis(cfg9, 9, "speed", values, OBJECTIVES, legs)
    raise ValueError(f"unknown figure {figure} (expected 5-9)")
