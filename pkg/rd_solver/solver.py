"""
rd_solver/solver.py
───────────────────
Method-of-lines solver for the diffusive host/vector system on [0, length]
with homogeneous Neumann boundaries.

  space  — second-order central differences; the boundary uses mirror ghost
           nodes (u[-1] = u[1], u[n] = u[n-2]), which makes the trapezoid-
           weighted mass exactly conserved by the discrete Laplacian
  time   — explicit classical RK4 with a fixed step shared with the ODE
           integrator in model_core
  dt     — 'auto' picks 0.9*dx^2/(2*max(d_h, d_v)), capped at
           0.05/max_reaction_rate

Hosts (x1, x2) diffuse with d_h, vectors (x3, x4) with d_v.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from model_core.derived import max_reaction_rate, require_valid
from model_core.kinetics import kinetics, rk4_step
from rd_solver.grid import (
    Grid1D,
    IcPiece,
    SimConfig,
    SimState,
    split_ic_pieces,
    seeded_ic_pieces,
)
from schemas.params_schema import ModelParams

# state magnitude, in units of b1/mu + b2/eta, treated as a blow-up
BLOWUP_FACTOR = 10.0


# ─────────────────────────────────────────────────────────────────────────────
# STENCIL
# ─────────────────────────────────────────────────────────────────────────────

def laplacian_neumann(u: np.ndarray, dx: float) -> np.ndarray:
    """Second difference along the last axis with mirror ghost nodes."""
    pad = [(0, 0)] * (u.ndim - 1) + [(1, 1)]
    padded = np.pad(u, pad, mode="reflect")
    return (padded[..., 2:] - 2.0 * padded[..., 1:-1] + padded[..., :-2]) / (dx * dx)


def discrete_mass(u: np.ndarray, dx: float) -> np.ndarray:
    """Trapezoid-weighted integral along the last axis."""
    weights = np.ones(u.shape[-1])
    weights[0] = weights[-1] = 0.5
    return (u * weights).sum(axis=-1) * dx


def diffusion_column(p: ModelParams) -> np.ndarray:
    return np.array([p.d_h, p.d_h, p.d_v, p.d_v])[:, None]


def auto_dt(grid: Grid1D, p: ModelParams) -> float:
    diffusive = 0.9 * grid.dx ** 2 / (2.0 * max(p.d_h, p.d_v))
    reactive = 0.05 / max_reaction_rate(p)
    return min(diffusive, reactive)


# ─────────────────────────────────────────────────────────────────────────────
# INITIAL CONDITIONS
# ─────────────────────────────────────────────────────────────────────────────

def initial_state(grid: Grid1D, pieces: Sequence[IcPiece]) -> SimState:
    y = grid.y
    fields = np.full((4, grid.n), np.nan)
    for i, piece in enumerate(pieces):
        upper = y <= piece.stop if i == len(pieces) - 1 else y < piece.stop
        mask = (y >= piece.start) & upper
        fields[:, mask] = np.asarray(piece.state, dtype=float)[:, None]
    if np.isnan(fields).any():
        uncovered = y[np.isnan(fields[0])]
        raise ValueError(f"initial condition leaves {uncovered.size} nodes uncovered, first at y={uncovered[0]}")
    return SimState(t=0.0, fields=fields, grid=grid)


def build_split_ic(grid: Grid1D, p: ModelParams, split_at: float) -> SimState:
    return initial_state(grid, split_ic_pieces(grid, p, split_at))


def build_seeded_ic(grid: Grid1D, p: ModelParams, split_at: float, seed: float) -> SimState:
    return initial_state(grid, seeded_ic_pieces(grid, p, split_at, seed))


# ─────────────────────────────────────────────────────────────────────────────
# TIME STEPPING
# ─────────────────────────────────────────────────────────────────────────────

def step(
    state: SimState,
    p: ModelParams,
    dt: float,
    include_kinetics: bool = True,
) -> SimState:
    """One RK4 step. include_kinetics=False leaves pure diffusion."""
    dx = state.grid.dx
    diffusion = diffusion_column(p)

    def rhs(u: np.ndarray) -> np.ndarray:
        out = diffusion * laplacian_neumann(u, dx)
        if include_kinetics:
            out = out + kinetics(u, p)
        return out

    fields = rk4_step(rhs, state.fields, dt)
    ceiling = BLOWUP_FACTOR * (p.b1 / p.mu + p.b2 / p.eta)
    if not np.all(np.isfinite(fields)) or np.any(fields > ceiling):
        raise InstabilityDetected(
            f"solution blew up in the step from t={state.t!r} (dt={dt!r}); "
            f"last stable time t={state.t!r}",
            last_stable_t=state.t,
        )
    return SimState(t=state.t + dt, fields=fields, grid=state.grid)


def schedule(t_end: float, snapshot_every: float, dt_max: float) -> list[tuple[float, int, float]]:
    """
    Snapshot intervals as (target time, steps, step size).
    Whole intervals reuse one step size; a trailing partial interval gets its own.
    """
    intervals: list[tuple[float, int, float]] = []
    if t_end <= 0.0:
        return intervals
    n_full = int(math.floor(t_end / snapshot_every + 1e-9))
    steps = max(1, math.ceil(snapshot_every / dt_max - 1e-9))
    for k in range(1, n_full + 1):
        intervals.append((k * snapshot_every, steps, snapshot_every / steps))

    rest = t_end - n_full * snapshot_every
    if rest > 1e-9 * max(1.0, t_end):
        n_rest = max(1, math.ceil(rest / dt_max - 1e-9))
        intervals.append((t_end, n_rest, rest / n_rest))
    elif intervals:
        _, n, h = intervals[-1]
        intervals[-1] = (t_end, n, h)
    return intervals


def resolve_dt(config: SimConfig, p: ModelParams) -> float:
    bound = auto_dt(config.grid, p)
    if config.dt == "auto":
        return bound
    dt = float(config.dt)
    if dt > bound:
        print(f"[rd_solver] dt={dt!r} exceeds the stability bound {bound!r}; run may blow up")
    return dt


def run(config: SimConfig, p: ModelParams) -> list[SimState]:
    """
    Advances the configured initial condition to t_end.
    Returns snapshots at t = 0, every snapshot_every, and t_end. Deterministic.
    """
    require_valid(p)
    dt_max = resolve_dt(config, p)
    plan = schedule(config.t_end, config.snapshot_every, dt_max)
    total_steps = sum(n for _, n, _ in plan)
    print(
        f"[rd_solver] n={config.grid.n} dx={config.grid.dx!r} dt<={dt_max!r} "
        f"t_end={config.t_end!r} steps={total_steps}"
    )

    state = initial_state(config.grid, config.ic_spec)
    snapshots = [state]
    for target, n_steps, h in plan:
        for _ in range(n_steps):
            state = step(state, p, h)
        state = SimState(t=target, fields=state.fields, grid=state.grid)
        snapshots.append(state)

    print(f"[rd_solver] done: {len(snapshots)} snapshots up to t={state.t!r}")
    return snapshots


class InstabilityDetected(RuntimeError):
    """Raised when the explicit scheme blows up; carries the last stable time."""

    def __init__(self, message: str, last_stable_t: float):
        super().__init__(message)
        self.last_stable_t = last_stable_t
