"""
rd_solver/grid.py
─────────────────
Spatial grid, simulation state and run configuration for the 1-D solver.

Nodes are uniformly spaced on [0, length] with both ends included. The
initial condition is a piecewise-constant list of IcPiece intervals,
half-open [start, stop) except that the last piece also owns y = length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Union

import numpy as np

from model_core.derived import derived_quantities
from model_core.equilibria import R0_THRESHOLD_TOL, disease_free_equilibrium, endemic_equilibrium
from schemas.params_schema import ModelParams, RunConfig


@dataclass(frozen=True)
class Grid1D:
    length: float
    n:      int

    def __post_init__(self):
        if not (math.isfinite(self.length) and self.length > 0):
            raise ValueError(f"Grid1D.length must be positive, got {self.length}")
        if self.n < 3:
            raise ValueError(f"Grid1D.n must be >= 3, got {self.n}")

    @property
    def dx(self) -> float:
        return self.length / (self.n - 1)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n)


@dataclass(frozen=True)
class SimState:
    t:      float
    fields: np.ndarray  # shape (4, n): x1, x2, x3, x4 at the nodes
    grid:   Grid1D

    def __post_init__(self):
        if self.fields.shape != (4, self.grid.n):
            raise ValueError(
                f"SimState.fields must have shape (4, {self.grid.n}), got {self.fields.shape}"
            )
        if not np.all(np.isfinite(self.fields)):
            raise ValueError(f"SimState at t={self.t} holds non-finite values")

    def field(self, index: int) -> np.ndarray:
        """Compartment by its 1-based index (2 = infected hosts)."""
        if index not in (1, 2, 3, 4):
            raise ValueError(f"field index must be 1..4, got {index}")
        return self.fields[index - 1]

    def clipped(self) -> np.ndarray:
        """Fields with round-off negatives set to zero, for export."""
        return np.maximum(self.fields, 0.0)


@dataclass(frozen=True)
class IcPiece:
    start: float
    stop:  float
    state: tuple[float, float, float, float]

    def __post_init__(self):
        if not self.start < self.stop:
            raise ValueError(f"IcPiece needs start < stop, got [{self.start}, {self.stop})")
        if any(v < 0 for v in self.state):
            raise ValueError(f"IcPiece state must be >= 0, got {self.state}")


@dataclass(frozen=True)
class SimConfig:
    grid:           Grid1D
    t_end:          float
    dt:             Union[Literal["auto"], float]
    snapshot_every: float
    ic_spec:        tuple[IcPiece, ...]

    def __post_init__(self):
        if not self.t_end >= 0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end}")
        if not self.snapshot_every > 0:
            raise ValueError(f"snapshot_every must be positive, got {self.snapshot_every}")
        if self.dt != "auto" and not float(self.dt) > 0:
            raise ValueError(f"dt must be positive or 'auto', got {self.dt}")
        if not self.ic_spec:
            raise ValueError("ic_spec needs at least one piece")

    @classmethod
    def from_run_config(cls, config: RunConfig) -> "SimConfig":
        grid = Grid1D(config.grid.length, config.grid.n)
        p = config.params
        if derived_quantities(p).r0 > 1.0 + R0_THRESHOLD_TOL:
            pieces = split_ic_pieces(grid, p, config.ic.split_at)
        else:
            pieces = seeded_ic_pieces(grid, p, config.ic.split_at, config.ic.seed)
        return cls(
            grid=grid,
            t_end=config.time.t_end,
            dt=config.time.dt,
            snapshot_every=config.time.snapshot_every,
            ic_spec=pieces,
        )


# ─────────────────────────────────────────────────────────────────────────────
# INITIAL CONDITION PIECES
# ─────────────────────────────────────────────────────────────────────────────

def split_ic_pieces(grid: Grid1D, p: ModelParams, split_at: float) -> tuple[IcPiece, ...]:
    """Endemic state on [0, split_at), disease-free state on [split_at, length]."""
    if not 0.0 < split_at < grid.length:
        raise ValueError(f"split_at must lie in (0, {grid.length}), got {split_at}")
    left = endemic_equilibrium(p)
    right = disease_free_equilibrium(p)
    return (
        IcPiece(0.0, split_at, (left.x1, left.x2, left.x3, left.x4)),
        IcPiece(split_at, grid.length, (right.x1, right.x2, right.x3, right.x4)),
    )


def seeded_ic_pieces(
    grid: Grid1D,
    p: ModelParams,
    split_at: float,
    seed: float,
) -> tuple[IcPiece, ...]:
    """
    Disease-free state with a fraction `seed` of hosts and vectors moved to
    the infected classes on [0, split_at). Totals stay on the invariant manifold.
    """
    if not 0.0 < split_at < grid.length:
        raise ValueError(f"split_at must lie in (0, {grid.length}), got {split_at}")
    if not 0.0 < seed < 1.0:
        raise ValueError(f"seed must lie in (0, 1), got {seed}")
    e0 = disease_free_equilibrium(p)
    seeded = ((1.0 - seed) * e0.x1, seed * e0.x1, (1.0 - seed) * e0.x3, seed * e0.x3)
    return (
        IcPiece(0.0, split_at, seeded),
        IcPiece(split_at, grid.length, (e0.x1, e0.x2, e0.x3, e0.x4)),
    )
