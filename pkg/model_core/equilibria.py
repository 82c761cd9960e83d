"""
model_core/equilibria.py
────────────────────────
Rest states of the kinetics.

  E0 (disease-free) — (b1/mu, 0, b2/eta, 0), exists for every parameter set
  E1 (endemic)      — positive state, exists only when r0 > 1

E1 comes from a quadratic in the infected-host density x2. Its coefficients
span many orders of magnitude at realistic rates, so the root is taken with
the two-step formula: larger-magnitude root first, the other from k0/(k2*root).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from model_core.derived import derived_quantities, require_valid
from schemas.params_schema import ModelParams

# r0 this close to 1 counts as the threshold itself
R0_THRESHOLD_TOL = 1e-12


@dataclass(frozen=True)
class Equilibrium:
    x1: float  # susceptible hosts
    x2: float  # infected hosts
    x3: float  # susceptible vectors
    x4: float  # infected vectors

    def __post_init__(self):
        for name in ("x1", "x2", "x3", "x4"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"Equilibrium.{name} must be finite and >= 0, got {value}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3, self.x4], dtype=float)

    def as_dict(self) -> dict[str, float]:
        return {"x1": self.x1, "x2": self.x2, "x3": self.x3, "x4": self.x4}

    @classmethod
    def from_array(cls, x) -> "Equilibrium":
        x1, x2, x3, x4 = (float(v) for v in np.asarray(x, dtype=float))
        return cls(x1, x2, x3, x4)


def disease_free_equilibrium(p: ModelParams) -> Equilibrium:
    require_valid(p)
    return Equilibrium(p.b1 / p.mu, 0.0, p.b2 / p.eta, 0.0)


def endemic_quadratic(p: ModelParams) -> tuple[float, float, float]:
    """Coefficients (k2, k1, k0) of k2*x2^2 + k1*x2 + k0 = 0."""
    require_valid(p)
    r0 = derived_quantities(p).r0
    k0 = -p.mu * p.eta ** 2 * (p.mu + p.phi) * (r0 - 1.0)
    k1 = (
        p.phi * p.beta * p.eta * p.mu
        + p.eta ** 2 * p.beta1 * p.mu
        + p.beta * p.b2 * p.beta2 * p.mu
        + p.beta * p.eta * p.mu ** 2
        - p.beta * p.b1 * p.eta * p.beta1
    )
    k2 = p.beta * p.eta * p.beta1 * p.mu
    return k2, k1, k0


def endemic_equilibrium(p: ModelParams) -> Equilibrium:
    dq = derived_quantities(p)
    if dq.r0 <= 1.0 + R0_THRESHOLD_TOL:
        raise NoEndemicEquilibrium(
            f"r0 = {dq.r0!r} <= 1: the endemic state does not exist"
        )

    k2, k1, k0 = endemic_quadratic(p)
    disc = k1 * k1 - 4.0 * k2 * k0
    q = -0.5 * (k1 + math.copysign(math.sqrt(disc), k1))
    big = q / k2
    small = k0 / (k2 * big)
    x2 = big if big > 0.0 else small
    if not x2 > 0.0:
        raise NoEndemicEquilibrium(f"quadratic has no positive root (k0={k0!r})")

    shared = p.eta + p.beta * x2
    x3 = p.b2 / shared
    x4 = (p.beta * p.b2 / p.eta) * x2 / shared
    x1 = p.eta * (p.mu + p.phi) * shared / (p.beta1 * p.eta * shared + p.beta * p.beta2 * p.b2)
    return Equilibrium(x1, x2, x3, x4)


class NoEndemicEquilibrium(ValueError):
    """Raised when r0 <= 1 and only the disease-free state exists."""
    pass
