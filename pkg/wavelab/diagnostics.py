"""
wavelab/diagnostics.py
──────────────────────
Numerical checks run on simulation snapshots and on sampled wave profiles.

  conservation_report      — drift of the host and vector totals from b1/mu, b2/eta
  lower_bound_report       — minimum susceptibles against the persistence floors
  extinction_report        — decay of the infected maxima (r0 <= 1 runs)
  harnack_gradient_check   — |u'|/u against the gradient bound of a positive wave
  lyapunov_profile         — the Lyapunov function along a profile
  comparability_check      — largest ratio between infected hosts and vectors

Profiles are expressed in the wave coordinate s in which the disease-free
state sits at the left end and D*x'' - c*x' + F(x) = 0 holds for an exact
wave. A simulated front with the endemic state on the left moving right is
mapped there by s = -y (reflected_profile).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from model_core.derived import host_lower_bound, vector_lower_bound
from model_core.equilibria import Equilibrium, endemic_equilibrium
from model_core.kinetics import kinetics
from rd_solver.grid import SimState
from schemas.params_schema import ModelParams

MONOTONE_SLACK = 1e-10
EXTINCTION_RATIO = 1e-6
HARNACK_FLOOR = 1e-8
HARNACK_SLACK = 0.05
LYAPUNOV_SLACK = 0.01


# ─────────────────────────────────────────────────────────────────────────────
# SNAPSHOT REPORTS
# ─────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class ConservationRow:
    t:                float
    host_deviation:   float  # max |x1 + x2 - b1/mu|
    vector_deviation: float  # max |x3 + x4 - b2/eta|


@dataclass
class ConservationReport:
    rows:         list[ConservationRow] = field(default_factory=list)
    non_monotone: bool = False

    @property
    def max_deviation(self) -> float:
        if not self.rows:
            return 0.0
        return max(max(r.host_deviation, r.vector_deviation) for r in self.rows)


def conservation_report(snapshots: Sequence[SimState], p: ModelParams) -> ConservationReport:
    host_total = p.b1 / p.mu
    vector_total = p.b2 / p.eta
    rows = []
    for state in snapshots:
        x1, x2, x3, x4 = state.fields
        rows.append(ConservationRow(
            t=state.t,
            host_deviation=float(np.max(np.abs(x1 + x2 - host_total))),
            vector_deviation=float(np.max(np.abs(x3 + x4 - vector_total))),
        ))

    non_monotone = any(
        b.host_deviation > a.host_deviation + MONOTONE_SLACK
        or b.vector_deviation > a.vector_deviation + MONOTONE_SLACK
        for a, b in zip(rows, rows[1:])
    )
    return ConservationReport(rows=rows, non_monotone=non_monotone)


@dataclass(frozen=True)
class LowerBoundRow:
    t:      float
    min_x1: float
    min_x3: float


@dataclass
class LowerBoundReport:
    host_floor:   float
    vector_floor: float
    rows:         list[LowerBoundRow] = field(default_factory=list)

    @property
    def final_above_floors(self) -> bool:
        if not self.rows:
            return True
        last = self.rows[-1]
        return last.min_x1 >= self.host_floor and last.min_x3 >= self.vector_floor


def lower_bound_report(snapshots: Sequence[SimState], p: ModelParams) -> LowerBoundReport:
    report = LowerBoundReport(host_floor=host_lower_bound(p), vector_floor=vector_lower_bound(p))
    for state in snapshots:
        report.rows.append(LowerBoundRow(
            t=state.t,
            min_x1=float(state.field(1).min()),
            min_x3=float(state.field(3).min()),
        ))
    return report


@dataclass(frozen=True)
class ExtinctionRow:
    t:      float
    max_x2: float
    max_x4: float
    ratio2: float  # max_x2 / initial max_x2
    ratio4: float


@dataclass
class ExtinctionReport:
    rows:              list[ExtinctionRow]
    decay_rate_x2:     float  # fitted slope of log(max x2) after the transient, 1/day
    decay_rate_x4:     float
    monotone_after_transient: bool
    extinct:           bool   # both final ratios below EXTINCTION_RATIO


def _log_slope(t: np.ndarray, values: np.ndarray) -> float:
    positive = values > 0.0
    if positive.sum() < 2:
        return math.nan
    t, logs = t[positive], np.log(values[positive])
    dt = t - t.mean()
    denom = float(np.dot(dt, dt))
    if denom == 0.0:
        return math.nan
    return float(np.dot(dt, logs - logs.mean())) / denom


def extinction_report(snapshots: Sequence[SimState], transient_fraction: float = 0.5) -> ExtinctionReport:
    if not snapshots:
        return ExtinctionReport(rows=[], decay_rate_x2=math.nan, decay_rate_x4=math.nan,
                                monotone_after_transient=True, extinct=False)
    first = snapshots[0]
    init2 = float(first.field(2).max())
    init4 = float(first.field(4).max())

    rows = []
    for state in snapshots:
        m2 = float(state.field(2).max())
        m4 = float(state.field(4).max())
        rows.append(ExtinctionRow(
            t=state.t,
            max_x2=m2,
            max_x4=m4,
            ratio2=m2 / init2 if init2 > 0 else 0.0,
            ratio4=m4 / init4 if init4 > 0 else 0.0,
        ))

    t = np.array([r.t for r in rows])
    t_cut = t[0] + transient_fraction * (t[-1] - t[0])
    late = [r for r in rows if r.t >= t_cut]
    monotone = all(
        b.max_x2 <= a.max_x2 * (1 + 1e-12) and b.max_x4 <= a.max_x4 * (1 + 1e-12)
        for a, b in zip(late, late[1:])
    )
    keep = t >= t_cut
    last = rows[-1]
    return ExtinctionReport(
        rows=rows,
        decay_rate_x2=_log_slope(t[keep], np.array([r.max_x2 for r in rows])[keep]),
        decay_rate_x4=_log_slope(t[keep], np.array([r.max_x4 for r in rows])[keep]),
        monotone_after_transient=monotone,
        extinct=last.ratio2 < EXTINCTION_RATIO and last.ratio4 < EXTINCTION_RATIO,
    )


# ─────────────────────────────────────────────────────────────────────────────
# WAVE PROFILES
# ─────────────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class WaveProfile:
    s:      np.ndarray  # increasing wave coordinate
    fields: np.ndarray  # (4, m)
    d1:     np.ndarray  # (4, m) first derivatives in s

    def __post_init__(self):
        m = self.s.shape[0]
        if self.fields.shape != (4, m) or self.d1.shape != (4, m):
            raise ValueError(
                f"WaveProfile needs fields and d1 of shape (4, {m}), got "
                f"{self.fields.shape} and {self.d1.shape}"
            )

    @classmethod
    def from_samples(cls, s, fields) -> "WaveProfile":
        """Derivatives by second-order differences (one-sided at the ends)."""
        s = np.asarray(s, dtype=float)
        fields = np.asarray(fields, dtype=float)
        if s.size < 3:
            raise ValueError(f"a profile needs at least 3 samples, got {s.size}")
        return cls(s=s, fields=fields, d1=np.gradient(fields, s, axis=1, edge_order=2))

    @classmethod
    def constant(cls, state: Equilibrium, s) -> "WaveProfile":
        s = np.asarray(s, dtype=float)
        fields = np.repeat(state.as_array()[:, None], s.size, axis=1)
        return cls(s=s, fields=fields, d1=np.zeros_like(fields))


def positive_extent(state: SimState, start: float, floor: float = HARNACK_FLOOR) -> float:
    """Largest y >= start such that every field exceeds floor on [start, y]."""
    y = state.grid.y
    ahead = y >= start
    ok = np.all(state.fields > floor, axis=0)[ahead]
    nodes = y[ahead]
    if nodes.size == 0 or not ok[0]:
        return float(start)
    bad = np.nonzero(~ok)[0]
    return float(nodes[-1] if bad.size == 0 else nodes[bad[0] - 1])


def reflected_profile(state: SimState, lo: float, hi: float) -> WaveProfile:
    """Nodes with lo <= y <= hi, in the coordinate s = -y (increasing)."""
    y = state.grid.y
    keep = (y >= lo) & (y <= hi)
    if keep.sum() < 3:
        raise ValueError(f"window [{lo}, {hi}] holds fewer than 3 nodes")
    return WaveProfile.from_samples(-y[keep][::-1], state.fields[:, keep][:, ::-1])


# ─────────────────────────────────────────────────────────────────────────────
# HARNACK BOUND
# ─────────────────────────────────────────────────────────────────────────────

def harnack_bound(c: float, decay: float, diffusion: float) -> float:
    return (math.sqrt(c * c + 4.0 * decay) + abs(c)) / (2.0 * diffusion)


@dataclass(frozen=True)
class HarnackField:
    index:      int
    bound:      float
    max_ratio:  float  # max |u'|/u over evaluated nodes (0 if none)
    points:     int
    violations: int    # nodes with ratio > bound*(1 + slack)


@dataclass
class HarnackReport:
    fields: list[HarnackField]
    slack:  float

    @property
    def passed(self) -> bool:
        return all(f.violations == 0 for f in self.fields)


def harnack_gradient_check(
    profile: WaveProfile,
    c: float,
    p: ModelParams,
    floors: Optional[Mapping[int, float]] = None,
    slack: float = HARNACK_SLACK,
) -> HarnackReport:
    """
    |u'|/u <= (sqrt(c^2 + 4k) + |c|)/(2d) with (k, d) = (mu+phi, d_h) for the
    infected hosts and (eta, d_v) for the infected vectors, at nodes with u
    above the field's floor.
    """
    floors = dict(floors or {})
    constants = {2: (p.mu + p.phi, p.d_h), 4: (p.eta, p.d_v)}
    results = []
    for index, (decay, diffusion) in constants.items():
        bound = harnack_bound(c, decay, diffusion)
        u = profile.fields[index - 1]
        mask = u > floors.get(index, HARNACK_FLOOR)
        ratio = np.abs(profile.d1[index - 1][mask]) / u[mask]
        results.append(HarnackField(
            index=index,
            bound=bound,
            max_ratio=float(ratio.max()) if ratio.size else 0.0,
            points=int(mask.sum()),
            violations=int(np.sum(ratio > bound * (1.0 + slack))),
        ))
    return HarnackReport(fields=results, slack=slack)


# ─────────────────────────────────────────────────────────────────────────────
# LYAPUNOV FUNCTION
# ─────────────────────────────────────────────────────────────────────────────

def lyapunov_weights(p: ModelParams, e1: Optional[Equilibrium] = None) -> np.ndarray:
    e1 = e1 or endemic_equilibrium(p)
    a_host = p.beta * e1.x1 * e1.x4
    a_vector = p.beta2 * e1.x3 * e1.x2 + p.beta1 * e1.x1 * e1.x4
    return np.array([a_host, a_host, a_vector, a_vector])


def entropy_gap(s) -> np.ndarray:
    """s - 1 - ln(s)."""
    s = np.asarray(s, dtype=float)
    return s - 1.0 - np.log(s)


def g_functional(x, p: ModelParams) -> np.ndarray:
    """
    sum_i a_i*(1 - x_i**/x_i)*F_i(x). Nonpositive for positive x on the
    conservation manifold, zero only at E1.
    """
    e1 = endemic_equilibrium(p)
    x = np.asarray(x, dtype=float)
    weights = lyapunov_weights(p, e1)
    star = e1.as_array()
    if x.ndim == 2:
        weights, star = weights[:, None], star[:, None]
    return np.sum(weights * (1.0 - star / x) * kinetics(x, p), axis=0)


@dataclass
class LyapunovReport:
    s:                   np.ndarray
    V:                   np.ndarray
    dV:                  np.ndarray  # forward differences V[i+1] - V[i]
    fraction_increasing: float       # share of intervals with dV > slack*max|V|
    max_increase:        float
    slack:               float

    @property
    def non_increasing(self) -> bool:
        return self.fraction_increasing == 0.0


def lyapunov_profile(
    profile: WaveProfile,
    c: float,
    p: ModelParams,
    slack: float = LYAPUNOV_SLACK,
) -> LyapunovReport:
    e1 = endemic_equilibrium(p)
    if np.any(profile.fields <= 0.0):
        raise NonpositiveProfile("lyapunov_profile needs all four fields strictly positive")

    weights = lyapunov_weights(p, e1)[:, None]
    star = e1.as_array()[:, None]
    diffusion = np.array([p.d_h, p.d_h, p.d_v, p.d_v])[:, None]
    x, dx = profile.fields, profile.d1

    terms = diffusion * dx * (star / x - 1.0) + c * star * entropy_gap(x / star)
    V = np.sum(weights * terms, axis=0)
    dV = np.diff(V)

    tol = slack * float(np.max(np.abs(V))) if V.size else 0.0
    rising = dV > tol
    return LyapunovReport(
        s=profile.s,
        V=V,
        dV=dV,
        fraction_increasing=float(rising.mean()) if dV.size else 0.0,
        max_increase=float(dV.max()) if dV.size else 0.0,
        slack=slack,
    )


# ─────────────────────────────────────────────────────────────────────────────
# COMPARABILITY
# ─────────────────────────────────────────────────────────────────────────────

def comparability_check(x2, x4) -> float:
    """Smallest m with x2/m <= x4 <= m*x2 at every sample."""
    x2 = np.asarray(x2, dtype=float)
    x4 = np.asarray(x4, dtype=float)
    if x2.shape != x4.shape or x2.size == 0:
        raise ValueError("x2 and x4 must be non-empty arrays of one shape")
    if np.any(x2 <= 0.0) or np.any(x4 <= 0.0):
        raise NonpositiveProfile("comparability needs x2 > 0 and x4 > 0 at every sample")
    return float(np.max(np.maximum(x2 / x4, x4 / x2)))


class NonpositiveProfile(ValueError):
    """Raised when a profile check meets a field value <= 0."""
    pass
