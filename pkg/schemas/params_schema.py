"""
schemas/params_schema.py
────────────────────────
Pydantic models for the vector-host model and for a run configuration.

ModelParams carries the eight epidemiological rates plus the two diffusion
coefficients. Every field must be strictly positive and finite; anything
else is rejected at construction time.

RunConfig is the validated form of a flat key = value config file
(see cli/config_loader.py). Nested sections map onto dotted keys:

  grid.length, grid.n                         → GridSettings
  time.t_end, time.dt, time.snapshot_every    → TimeSettings
  ic.split_at, ic.seed                        → InitialConditionSettings
  out.dir                                     → OutputSettings
"""

from __future__ import annotations

from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


# ─────────────────────────────────────────────────────────────────────────────
# MODEL PARAMETERS
# ─────────────────────────────────────────────────────────────────────────────

PARAM_KEYS: tuple[str, ...] = (
    "mu", "eta", "phi", "beta1", "beta2", "beta", "b1", "b2", "d_h", "d_v",
)


class ModelParams(BaseModel):
    """
    Rates of the host/vector system. Hosts diffuse with d_h, vectors with d_v.
    Immutable: build a modified copy with with_updates().
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    mu:    float = Field(..., gt=0, allow_inf_nan=False, description="host mortality rate (1/day)")
    eta:   float = Field(..., gt=0, allow_inf_nan=False, description="vector mortality rate (1/day)")
    phi:   float = Field(..., gt=0, allow_inf_nan=False, description="host recovery rate (1/day)")
    beta1: float = Field(..., gt=0, allow_inf_nan=False, description="host→host transmission rate")
    beta2: float = Field(..., gt=0, allow_inf_nan=False, description="vector→host transmission rate")
    beta:  float = Field(..., gt=0, allow_inf_nan=False, description="host→vector transmission rate")
    b1:    float = Field(..., gt=0, allow_inf_nan=False, description="host recruitment rate")
    b2:    float = Field(..., gt=0, allow_inf_nan=False, description="vector recruitment rate")
    d_h:   float = Field(..., gt=0, allow_inf_nan=False, description="host diffusion (length²/day)")
    d_v:   float = Field(..., gt=0, allow_inf_nan=False, description="vector diffusion (length²/day)")

    def as_dict(self) -> dict[str, float]:
        return {key: getattr(self, key) for key in PARAM_KEYS}

    def with_updates(self, **changes: float) -> "ModelParams":
        """Validated copy with some fields replaced."""
        return ModelParams(**{**self.as_dict(), **changes})

    @classmethod
    def reference(cls) -> "ModelParams":
        """Mirrors configs/baseline.cfg for unit testing."""
        return cls(
            mu=0.83,
            eta=0.001,
            phi=0.35,
            beta1=0.005,
            beta2=0.003,
            beta=0.0011,
            b1=100.0,
            b2=0.1,
            d_h=0.2,
            d_v=0.5,
        )


# ─────────────────────────────────────────────────────────────────────────────
# RUN CONFIGURATION — one section per dotted key prefix
# ─────────────────────────────────────────────────────────────────────────────

class GridSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    length: float = Field(500.0, gt=0, allow_inf_nan=False, description="domain size")
    n:      int   = Field(1001, ge=3, description="number of nodes, both ends included")


class TimeSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    t_end:          float                        = Field(50.0, ge=0, allow_inf_nan=False)
    dt:             Union[Literal["auto"], float] = Field("auto", description="fixed step or 'auto'")
    snapshot_every: float                        = Field(0.5, gt=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def check_dt(self) -> "TimeSettings":
        if self.dt != "auto" and not (0.0 < float(self.dt) < float("inf")):
            raise ValueError(f"time.dt must be positive and finite or 'auto', got {self.dt}")
        return self


class InitialConditionSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    split_at: float = Field(200.0, gt=0, allow_inf_nan=False, description="endemic/disease-free interface")
    seed:     float = Field(0.25, gt=0, lt=1, description="infected fraction on the left when no endemic state exists")


class OutputSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    dir: str = "out"


class RunConfig(BaseModel):
    """
    Root object produced by the config loader.
    flat_items() echoes it back in config-file key order for the manifest.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    params: ModelParams
    grid:   GridSettings             = Field(default_factory=GridSettings)
    time:   TimeSettings             = Field(default_factory=TimeSettings)
    ic:     InitialConditionSettings = Field(default_factory=InitialConditionSettings)
    out:    OutputSettings           = Field(default_factory=OutputSettings)

    @model_validator(mode="after")
    def split_inside_domain(self) -> "RunConfig":
        if not self.ic.split_at < self.grid.length:
            raise ValueError(
                f"ic.split_at={self.ic.split_at} must lie inside (0, grid.length={self.grid.length})"
            )
        return self

    def flat_items(self) -> list[tuple[str, object]]:
        items: list[tuple[str, object]] = list(self.params.as_dict().items())
        items += [
            ("grid.length",         self.grid.length),
            ("grid.n",              self.grid.n),
            ("time.t_end",          self.time.t_end),
            ("time.dt",             self.time.dt),
            ("time.snapshot_every", self.time.snapshot_every),
            ("ic.split_at",         self.ic.split_at),
            ("ic.seed",             self.ic.seed),
            ("out.dir",             self.out.dir),
        ]
        return items
