"""Two-user NOMA rate evaluation and closed-form power allocation.

Covers max-min fairness (MMF) and QoS-constrained sum-rate (SR) objectives
under perfect channel knowledge and under lower/upper bounds that treat the
diffuse NLOS power as interference or as extra useful signal.  Every closed
form is backed by an independent brute-force grid oracle over the power
split; the oracle never touches the closed-form expressions.

Known quirks of the published closed forms (kept deliberately):
- the MMF upper-bound split sqrt(1+e)-1 carries no power-budget factor; it
  is shipped literally, with the oracle divergence attached to the report;
- the SR upper-bound stationary point pt*(sqrt(e^2+1)-e) usually violates
  the U1 rate floor, in which case the allocator defers to the oracle and
  flags the report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class AllocationInfeasibleError(ValueError):
    """Raised when no power split can satisfy the QoS constraints."""


@dataclass
class ChannelGains:
    """Scalar channel abstraction feeding the allocator.

    U1 is the weak user: h1_sq <= h2_sq is enforced at construction and
    violating inputs are swapped (flagged via `swapped`).
    """

    h1_sq: float
    h2_sq: float
    n0: float
    pt: float
    e: float = 0.0
    swapped: bool = field(default=False, init=False)

    def __post_init__(self):
        if min(self.h1_sq, self.h2_sq, self.e) < 0:
            raise ValueError("gains and NLOS strength must be non-negative")
        if self.n0 <= 0 or self.pt <= 0:
            raise ValueError("n0 and pt must be positive")
        if self.h1_sq > self.h2_sq:
            self.h1_sq, self.h2_sq = self.h2_sq, self.h1_sq
            self.swapped = True


@dataclass(frozen=True)
class PowerAllocation:
    """Per-user transmit powers in watts."""

    w1: float
    w2: float

    def __post_init__(self):
        if self.w1 < -1e-12 or self.w2 < -1e-12:
            raise ValueError("powers must be non-negative")


@dataclass(frozen=True)
class QosSpec:
    """Minimum per-user rates in bits/s/Hz."""

    r1_min: float = 0.0
    r2_min: float = 0.0

    def __post_init__(self):
        if self.r1_min < 0 or self.r2_min < 0:
            raise ValueError("rate floors must be non-negative")


@dataclass
class RateReport:
    """Allocation outcome for one instance."""

    r1: float
    r2: float
    allocation: PowerAllocation | None
    bound: str            # "perfect" | "lower" | "upper"
    feasible: bool
    oracle_allocation: PowerAllocation | None = None
    oracle_gap: float | None = None
    note: str = ""

    @property
    def min_rate(self) -> float:
        return min(self.r1, self.r2)

    @property
    def sum_rate(self) -> float:
        return self.r1 + self.r2


def _sinr_pair(g: ChannelGains, w1, w2, bound: str, e1=None, e2=None):
    """SINR of both users for the given split; broadcasts over w1/w2 arrays."""
    e1 = g.e if e1 is None else e1
    e2 = g.e if e2 is None else e2
    h1, h2, n0 = g.h1_sq, g.h2_sq, g.n0
    if bound == "perfect":
        s1 = w1 * h1 / (w2 * h1 + n0)
        s2 = w2 * h2 / n0
    elif bound == "lower":
        s1 = w1 * h1 / (w2 * (1 + e1) * h1 + w1 * e1 * h1 + n0)
        s2 = w2 * h2 / ((w1 + w2) * e2 * h2 + n0)
    elif bound == "upper":
        s1 = w1 * (1 + e1) * h1 / (w2 * (1 + e1) * h1 + n0)
        s2 = w2 * (1 + e2) * h2 / (w1 * e2 * h2 + n0)
    else:
        raise ValueError(f"unknown bound {bound!r}")
    return s1, s2


def rates_perfect(g: ChannelGains, a: PowerAllocation):
    """Achievable rates with SIC under LOS-only channel knowledge."""
    s1, s2 = _sinr_pair(g, a.w1, a.w2, "perfect")
    return float(np.log2(1 + s1)), float(np.log2(1 + s2))


def rates_bound(g: ChannelGains, a: PowerAllocation, bound: str,
                e1: float | None = None, e2: float | None = None):
    """Lower/upper bound rates under imperfect NLOS knowledge.

    "lower" counts all NLOS power as interference, "upper" folds the own
    NLOS power into the useful signal.  Both collapse to rates_perfect at
    e = 0.  Distinct per-user strengths may be supplied for oracle studies.
    """
    s1, s2 = _sinr_pair(g, a.w1, a.w2, bound, e1=e1, e2=e2)
    return float(np.log2(1 + s1)), float(np.log2(1 + s2))


def _rates(g, a, bound):
    if bound == "perfect":
        return rates_perfect(g, a)
    return rates_bound(g, a, bound)


def mmf_perfect(g: ChannelGains) -> RateReport:
    """Closed-form max-min fairness split; the two rates come out equal."""
    h1, h2, n0, pt = g.h1_sq, g.h2_sq, g.n0, g.pt
    b = h1 * n0 + h2 * n0
    w2 = (-b + np.sqrt(b * b + 4 * pt * h1**2 * h2 * n0)) / (2 * h1 * h2)
    alloc = PowerAllocation(w1=pt - w2, w2=float(w2))
    r1, r2 = rates_perfect(g, alloc)
    return RateReport(r1=r1, r2=r2, allocation=alloc, bound="perfect",
                      feasible=True)


def sr_perfect(g: ChannelGains, q: QosSpec) -> RateReport:
    """Closed-form sum-rate split: push power to U2 until U1's floor binds."""
    h1, h2, n0, pt = g.h1_sq, g.h2_sq, g.n0, g.pt
    gamma1 = 2.0**q.r1_min - 1.0
    w2 = (pt * h1 - gamma1 * n0) / (2.0**q.r1_min * h1)
    w2_floor = (2.0**q.r2_min - 1.0) * n0 / h2
    if w2 < max(0.0, w2_floor) - 1e-12:
        return RateReport(r1=0.0, r2=0.0, allocation=None, bound="perfect",
                          feasible=False, note="qos-infeasible")
    alloc = PowerAllocation(w1=pt - w2, w2=float(w2))
    r1, r2 = rates_perfect(g, alloc)
    return RateReport(r1=r1, r2=r2, allocation=alloc, bound="perfect",
                      feasible=True)


def mmf_imperfect(g: ChannelGains, bound: str,
                  oracle_steps: int = 20000) -> RateReport:
    """Max-min fairness under the imperfect-channel rate bounds.

    lower: exact equal-rate solution of the lower-bound expressions (reduces
    to the published pt*(sqrt(e^2+e)-e) as n0 -> 0 and to the perfect-channel
    split at e = 0).  upper: the published sqrt(1+e)-1 split, shipped
    literally with the oracle divergence attached.
    """
    pt, e = g.pt, g.e
    if bound == "lower":
        a_term = pt * e + g.n0 / g.h2_sq
        b_term = pt * e + g.n0 / g.h1_sq + a_term
        w2 = (-b_term + np.sqrt(b_term**2 + 4 * a_term * pt)) / 2.0
        alloc = PowerAllocation(w1=pt - w2, w2=float(w2))
        r1, r2 = rates_bound(g, alloc, "lower")
        return RateReport(r1=r1, r2=r2, allocation=alloc, bound="lower",
                          feasible=True)
    if bound != "upper":
        raise ValueError(f"unknown bound {bound!r}")

    w2 = np.sqrt(1.0 + e) - 1.0
    note = ""
    if not 0.0 <= w2 <= pt:
        alloc = grid_oracle(g, "mmf", QosSpec(), "upper", steps=oracle_steps)
        note = "oracle-fallback"
    else:
        alloc = PowerAllocation(w1=pt - w2, w2=float(w2))
    r1, r2 = rates_bound(g, alloc, "upper")
    oracle_alloc = grid_oracle(g, "mmf", QosSpec(), "upper", steps=oracle_steps)
    oracle_obj = min(rates_bound(g, oracle_alloc, "upper"))
    return RateReport(r1=r1, r2=r2, allocation=alloc, bound="upper",
                      feasible=True, oracle_allocation=oracle_alloc,
                      oracle_gap=oracle_obj - min(r1, r2), note=note)


def sr_imperfect(g: ChannelGains, q: QosSpec, bound: str,
                 oracle_steps: int = 20000) -> RateReport:
    """QoS-constrained sum rate under the imperfect-channel rate bounds."""
    pt, e = g.pt, g.e
    if bound == "lower":
        q1 = g.n0 / g.h1_sq
        w2 = (pt * (1 + e) + q1) / 2.0**q.r1_min - pt * e - q1
        if not -1e-12 <= w2 <= pt + 1e-12:
            return RateReport(r1=0.0, r2=0.0, allocation=None, bound="lower",
                              feasible=False, note="qos-infeasible")
        w2 = float(np.clip(w2, 0.0, pt))
        alloc = PowerAllocation(w1=pt - w2, w2=w2)
        r1, r2 = rates_bound(g, alloc, "lower")
        if r2 < q.r2_min - 1e-9:
            return RateReport(r1=r1, r2=r2, allocation=None, bound="lower",
                              feasible=False, note="qos-infeasible")
        return RateReport(r1=r1, r2=r2, allocation=alloc, bound="lower",
                          feasible=True)
    if bound != "upper":
        raise ValueError(f"unknown bound {bound!r}")

    w2 = pt * (np.sqrt(e * e + 1.0) - e)
    alloc = PowerAllocation(w1=pt - w2, w2=float(w2))
    r1, r2 = rates_bound(g, alloc, "upper")
    if r1 >= q.r1_min - 1e-9 and r2 >= q.r2_min - 1e-9 and 0 <= w2 <= pt:
        oracle_alloc = grid_oracle(g, "sr", q, "upper", steps=oracle_steps)
        oracle_obj = sum(rates_bound(g, oracle_alloc, "upper"))
        return RateReport(r1=r1, r2=r2, allocation=alloc, bound="upper",
                          feasible=True, oracle_allocation=oracle_alloc,
                          oracle_gap=oracle_obj - (r1 + r2))
    try:
        alloc = grid_oracle(g, "sr", q, "upper", steps=oracle_steps)
    except AllocationInfeasibleError:
        return RateReport(r1=0.0, r2=0.0, allocation=None, bound="upper",
                          feasible=False, note="qos-infeasible")
    r1, r2 = rates_bound(g, alloc, "upper")
    return RateReport(r1=r1, r2=r2, allocation=alloc, bound="upper",
                      feasible=True, note="oracle-fallback")


def _scan(g: ChannelGains, objective: str, q: QosSpec, bound: str,
          w2_grid: np.ndarray):
    """Score a power-split grid; returns (best w2, best index) or None."""
    w1_grid = g.pt - w2_grid
    s1, s2 = _sinr_pair(g, w1_grid, w2_grid, bound)
    if objective == "mmf":
        score = np.minimum(s1, s2)
    elif objective == "sr":
        gamma1 = 2.0**q.r1_min - 1.0
        gamma2 = 2.0**q.r2_min - 1.0
        feasible = (s1 >= gamma1 * (1 - 1e-12) - 1e-15) & \
                   (s2 >= gamma2 * (1 - 1e-12) - 1e-15)
        if not np.any(feasible):
            return None
        score = np.where(feasible, np.log1p(s1) + np.log1p(s2), -np.inf)
    else:
        raise ValueError(f"unknown objective {objective!r}")
    best = int(np.argmax(score))
    return float(w2_grid[best]), best


def grid_oracle(g: ChannelGains, objective: str, q: QosSpec, bound: str,
                steps: int = 100_000) -> PowerAllocation:
    """Brute-force power-split search evaluating the exact rate expressions.

    Scans w2 over a uniform grid of the stated step, then re-scans one step
    around the coarse argmax at step/steps resolution so the returned
    objective is accurate well below the coarse-grid modulus of continuity.
    Never consults the closed forms.
    """
    if steps < 1000:
        raise ValueError("steps must be >= 1000")
    coarse = np.linspace(0.0, g.pt, steps + 1)
    hit = _scan(g, objective, q, bound, coarse)
    if hit is None:
        raise AllocationInfeasibleError("no grid point satisfies the QoS floors")
    w2c, _ = hit
    step = g.pt / steps
    fine = np.linspace(max(0.0, w2c - step), min(g.pt, w2c + step), steps + 1)
    w2, _ = _scan(g, objective, q, bound, fine) or (w2c, None)
    return PowerAllocation(w1=g.pt - w2, w2=w2)
