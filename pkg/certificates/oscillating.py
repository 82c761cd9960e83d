"""
certificates/oscillating.py
───────────────────────────
Compactly supported auxiliary function used to rule out wave speeds below c*.

Given a small perturbation epsilon of the disease-free state, the infected
hosts are bounded below by a solution of the constant-coefficient problem

    D*h'' - gamma*h' + K*h = 0   on (-L, L),   h(+-L) = 0,   h > 0 inside

with K = alpha_max(0) - epsilon*(1 + alpha). For gamma^2 < 4*D*K the
characteristic roots are complex, gamma/(2D) +- i*gamma_tilde/(2D) with
gamma_tilde = sqrt(4*D*K - gamma^2), and

    h(y) = e^{gamma*y/(2D)} * cos(gamma_tilde*y/(2D)),   L = pi*D/gamma_tilde

is the solution. alpha is the positive root of

    (beta2*b1/mu)*a^2 + (eta - l0)*a - beta*b2/eta = 0

i.e. the ratio x4/x2 along the principal direction at lambda = 0 scaled by
beta2*b1/mu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from model_core.derived import derived_quantities
from schemas.params_schema import ModelParams


@dataclass(frozen=True)
class OscillatingSolution:
    epsilon:     float
    gamma:       float
    D:           float
    alpha:       float
    gamma_tilde: float
    half_width:  float       # L
    y:           np.ndarray  # samples on [-L, L]
    h:           np.ndarray  # h(y); both endpoints exactly zero
    max_residual: float      # max |D*h'' - gamma*h' + K*h| over the interior samples

    def as_dict(self) -> dict[str, float]:
        return {
            "epsilon":      self.epsilon,
            "gamma":        self.gamma,
            "D":            self.D,
            "alpha":        self.alpha,
            "gamma_tilde":  self.gamma_tilde,
            "L":            self.half_width,
            "max_residual": self.max_residual,
        }


def oscillating_alpha(p: ModelParams) -> float:
    dq = derived_quantities(p)
    return (dq.alpha_max_zero + dq.l0) / (p.beta2 * p.b1 / p.mu)


def alpha_quadratic_residual(alpha: float, p: ModelParams) -> float:
    dq = derived_quantities(p)
    return (p.beta2 * p.b1 / p.mu) * alpha ** 2 + (p.eta - dq.l0) * alpha - p.beta * p.b2 / p.eta


def oscillating_h(
    epsilon: float,
    gamma: float,
    D: float,
    p: ModelParams,
    samples: int = 401,
) -> OscillatingSolution:
    if not (math.isfinite(D) and D > 0.0):
        raise ValueError(f"D must be positive and finite, got {D!r}")
    if samples < 3:
        raise ValueError(f"samples must be >= 3, got {samples}")

    dq = derived_quantities(p)
    alpha = oscillating_alpha(p)
    eps_max = dq.alpha_max_zero / (1.0 + alpha)
    if not (math.isfinite(epsilon) and 0.0 < epsilon < eps_max):
        raise BadEpsilon(f"epsilon must lie in (0, {eps_max!r}), got {epsilon!r}")

    K = dq.alpha_max_zero - epsilon * (1.0 + alpha)
    gamma_max = math.sqrt(4.0 * D * K)
    if not (math.isfinite(gamma) and 0.0 < gamma < gamma_max):
        raise BadGamma(f"gamma must lie in (0, {gamma_max!r}), got {gamma!r}")

    gamma_tilde = math.sqrt(4.0 * D * K - gamma * gamma)
    half_width = math.pi * D / gamma_tilde
    a = gamma / (2.0 * D)
    w = gamma_tilde / (2.0 * D)

    y = np.linspace(-half_width, half_width, samples)
    grow = np.exp(a * y)
    cos, sin = np.cos(w * y), np.sin(w * y)
    h = grow * cos
    h1 = grow * (a * cos - w * sin)
    h2 = grow * ((a * a - w * w) * cos - 2.0 * a * w * sin)
    h[0] = h[-1] = 0.0

    residual = D * h2[1:-1] - gamma * h1[1:-1] + K * h[1:-1]
    return OscillatingSolution(
        epsilon=epsilon,
        gamma=gamma,
        D=D,
        alpha=alpha,
        gamma_tilde=gamma_tilde,
        half_width=half_width,
        y=y,
        h=h,
        max_residual=float(np.max(np.abs(residual))),
    )


class BadEpsilon(ValueError):
    """Raised when epsilon is outside (0, alpha_max(0)/(1 + alpha))."""
    pass


class BadGamma(ValueError):
    """Raised when gamma is outside (0, sqrt(4*D*(alpha_max(0) - epsilon*(1 + alpha))))."""
    pass
