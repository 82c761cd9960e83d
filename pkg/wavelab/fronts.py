"""
wavelab/fronts.py
─────────────────
Level-set front tracking and empirical wave-speed estimation.

The front of a field at a level is its rightmost crossing of that level,
found by scanning from the right boundary and interpolating linearly
between the bracketing nodes. Speeds are ordinary least-squares slopes of
front position against time over the late part of the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from rd_solver.grid import SimState

MIN_FIT_POINTS = 5


@dataclass(frozen=True)
class FrontTrace:
    entries:     tuple[tuple[float, float], ...]  # (t, y_front), increasing t
    level:       float
    field_index: int = 2

    def __post_init__(self):
        times = [t for t, _ in self.entries]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("FrontTrace entries must be sorted by time")

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.entries], dtype=float)

    @property
    def positions(self) -> np.ndarray:
        return np.array([y for _, y in self.entries], dtype=float)


@dataclass(frozen=True)
class SpeedEstimate:
    speed:        float
    intercept:    float
    fit_window:   tuple[float, float]
    rms_residual: float
    points:       int

    def as_dict(self) -> dict[str, float]:
        return {
            "speed":        self.speed,
            "intercept":    self.intercept,
            "fit_t_start":  self.fit_window[0],
            "fit_t_end":    self.fit_window[1],
            "rms_residual": self.rms_residual,
            "points":       self.points,
        }


def crossing_position(y: np.ndarray, u: np.ndarray, level: float) -> Optional[float]:
    """Rightmost crossing of `level` by the sampled profile u(y), or None."""
    u = np.asarray(u, dtype=float)
    if not (u.min() < level < u.max()):
        return None
    shifted = u - level
    sign = np.sign(shifted)
    changes = np.nonzero(sign[:-1] != sign[1:])[0]
    i = int(changes[-1])
    left, right = shifted[i], shifted[i + 1]
    return float(y[i] + left / (left - right) * (y[i + 1] - y[i]))


def front_position(state: SimState, field_index: int, level: float) -> Optional[float]:
    return crossing_position(state.grid.y, state.field(field_index), level)


def track_front(snapshots: Sequence[SimState], field_index: int, level: float) -> FrontTrace:
    """Front position per snapshot; snapshots without a crossing are skipped."""
    entries = []
    for state in snapshots:
        position = front_position(state, field_index, level)
        if position is not None:
            entries.append((state.t, position))
    return FrontTrace(entries=tuple(entries), level=level, field_index=field_index)


def estimate_speed(trace: FrontTrace, discard_fraction: float = 0.5) -> SpeedEstimate:
    if not 0.0 <= discard_fraction < 1.0:
        raise ValueError(f"discard_fraction must lie in [0, 1), got {discard_fraction}")
    t, y = trace.times, trace.positions
    if t.size == 0:
        raise InsufficientPoints("front trace is empty")

    t_cut = t[0] + discard_fraction * (t[-1] - t[0])
    keep = t >= t_cut
    t, y = t[keep], y[keep]
    if t.size < MIN_FIT_POINTS:
        raise InsufficientPoints(
            f"need at least {MIN_FIT_POINTS} trace points for a fit, have {t.size} after "
            f"discarding t < {t_cut!r}"
        )

    t_mean, y_mean = t.mean(), y.mean()
    dt = t - t_mean
    denom = float(np.dot(dt, dt))
    if denom == 0.0:
        raise InsufficientPoints("all retained trace points share one time")
    speed = float(np.dot(dt, y - y_mean)) / denom
    intercept = float(y_mean - speed * t_mean)
    residual = y - (intercept + speed * t)
    return SpeedEstimate(
        speed=speed,
        intercept=intercept,
        fit_window=(float(t[0]), float(t[-1])),
        rms_residual=math.sqrt(float(np.mean(residual ** 2))),
        points=int(t.size),
    )


class InsufficientPoints(ValueError):
    """Raised when a speed fit has fewer than five trace points."""
    pass
