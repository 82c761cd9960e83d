"""
model_core/derived.py
─────────────────────
Scalar quantities derived from ModelParams.

  l0              — net loss rate of infected hosts at the disease-free state
                    (mu + phi - beta1*b1/mu)
  l1              — product of the two cross-infection rates at the
                    disease-free state (beta*beta2*b1*b2/(mu*eta))
  r0              — basic reproduction number (direct + vector-borne terms)
  alpha_max_zero  — principal growth rate of the linearised infected system

r0 > 1 and alpha_max_zero > 0 are the same condition; alpha_max_zero is
computed so that its sign stays correct right next to the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from pydantic import ValidationError

from schemas.params_schema import PARAM_KEYS, ModelParams


@dataclass(frozen=True)
class DerivedQuantities:
    l0:             float
    l1:             float
    r0:             float
    alpha_max_zero: float

    def __post_init__(self):
        if not self.l1 > 0:
            raise ValueError(f"l1 must be positive, got {self.l1}")
        if not self.r0 > 0:
            raise ValueError(f"r0 must be positive, got {self.r0}")

    @property
    def supercritical(self) -> bool:
        return self.alpha_max_zero > 0

    def as_dict(self) -> dict[str, float]:
        return {
            "r0":             self.r0,
            "l0":             self.l0,
            "l1":             self.l1,
            "alpha_max_zero": self.alpha_max_zero,
        }


# ─────────────────────────────────────────────────────────────────────────────
# VALIDATION
# ─────────────────────────────────────────────────────────────────────────────

def require_valid(p: ModelParams) -> ModelParams:
    """
    Re-checks the ModelParams invariants. Instances built through
    model_construct() skip pydantic, so every public operation calls this.
    """
    for key in PARAM_KEYS:
        value = getattr(p, key)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise InvalidParams(f"{key} must be strictly positive and finite, got {value!r}")
    return p


def load_params(values: Mapping[str, object]) -> ModelParams:
    """Builds ModelParams from a mapping, reporting failures as InvalidParams."""
    try:
        return ModelParams(**dict(values))
    except ValidationError as e:
        fields = ", ".join(".".join(str(part) for part in err["loc"]) for err in e.errors())
        raise InvalidParams(f"invalid model parameters: {fields}") from e


# ─────────────────────────────────────────────────────────────────────────────
# 2x2 EIGENVALUES
# ─────────────────────────────────────────────────────────────────────────────

def eigen_pair(m1: float, m2: float, l1: float) -> tuple[float, float]:
    """
    Roots (alpha_min, alpha_max) of (m1 - a)(m2 - a) = l1 with l1 > 0.

    The root that does not suffer cancellation is formed directly, the other
    one from the product alpha_min * alpha_max = m1*m2 - l1.
    """
    root = math.sqrt((m1 - m2) ** 2 + 4.0 * l1)
    product = m1 * m2 - l1
    if m1 + m2 <= 0.0:
        alpha_min = 0.5 * (m1 + m2 - root)
        alpha_max = product / alpha_min
    else:
        alpha_max = 0.5 * (m1 + m2 + root)
        alpha_min = product / alpha_max
    return alpha_min, alpha_max


# ─────────────────────────────────────────────────────────────────────────────
# DERIVED QUANTITIES
# ─────────────────────────────────────────────────────────────────────────────

def derived_quantities(p: ModelParams) -> DerivedQuantities:
    require_valid(p)
    l0 = p.mu + p.phi - p.beta1 * p.b1 / p.mu
    l1 = p.beta * p.beta2 * p.b1 * p.b2 / (p.mu * p.eta)
    r0 = (
        p.beta1 * p.b1 / (p.mu * (p.mu + p.phi))
        + p.beta * p.beta2 * p.b1 * p.b2 / (p.eta ** 2 * p.mu * (p.phi + p.mu))
    )

    # At lambda = 0: m1 = -l0, m2 = -eta and m1*m2 - l1 = eta*(mu+phi)*(1 - r0)
    m1, m2 = -l0, -p.eta
    root = math.sqrt((m1 - m2) ** 2 + 4.0 * l1)
    if m1 + m2 <= 0.0:
        alpha_min = 0.5 * (m1 + m2 - root)
        alpha_max_zero = p.eta * (p.mu + p.phi) * (1.0 - r0) / alpha_min
    else:
        alpha_max_zero = 0.5 * (m1 + m2 + root)

    return DerivedQuantities(l0=l0, l1=l1, r0=r0, alpha_max_zero=alpha_max_zero)


def max_reaction_rate(p: ModelParams) -> float:
    """Largest per-capita loss rate inside x1+x2 <= b1/mu, x3+x4 <= b2/eta."""
    require_valid(p)
    host = p.mu + p.phi + p.beta1 * p.b1 / p.mu + p.beta2 * p.b2 / p.eta
    vector = p.eta + p.beta * p.b1 / p.mu
    return max(host, vector)


def host_lower_bound(p: ModelParams) -> float:
    """Floor that susceptible hosts eventually stay above."""
    require_valid(p)
    return p.b1 / (p.mu + p.beta2 * p.b2 / p.eta + p.beta1 * p.b1 / p.mu)


def vector_lower_bound(p: ModelParams) -> float:
    """Floor that susceptible vectors eventually stay above."""
    require_valid(p)
    return p.b2 / (p.eta + p.beta * p.b2 / p.eta)


class InvalidParams(ValueError):
    """Raised when a rate is nonpositive or non-finite."""
    pass
