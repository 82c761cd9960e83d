"""
model_core/kinetics.py
──────────────────────
Reaction terms F of the host/vector system and a fixed-step RK4 integrator
for the spatially homogeneous problem.

State layout is (x1, x2, x3, x4) along the first axis:
  x1 susceptible hosts, x2 infected hosts,
  x3 susceptible vectors, x4 infected vectors.
kinetics() accepts a 4-vector or a (4, n) array of nodal values, so the
PDE solver evaluates the same expressions node-wise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from model_core.derived import require_valid
from schemas.params_schema import ModelParams

# accepted undershoot below zero before a step is rejected
NEGATIVE_TOL = 1e-9


def kinetics(x, p: ModelParams) -> np.ndarray:
    x1, x2, x3, x4 = np.asarray(x, dtype=float)
    f1 = p.b1 - (p.mu + p.beta2 * x4 + p.beta1 * x2) * x1 + p.phi * x2
    f2 = (p.beta1 * x1 - (p.phi + p.mu)) * x2 + p.beta2 * x1 * x4
    f3 = p.b2 - (p.eta + p.beta * x2) * x3
    f4 = p.beta * x2 * x3 - p.eta * x4
    return np.stack([f1, f2, f3, f4])


def rk4_step(f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, dt: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of x' = f(x)."""
    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@dataclass(frozen=True)
class Trajectory:
    times:  np.ndarray  # shape (m,)
    states: np.ndarray  # shape (m, 4)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def integrate_kinetics(
    x0,
    p: ModelParams,
    t_end: float,
    dt: float = 0.01,
    sample_every: int = 1,
) -> Trajectory:
    """
    Fixed-step RK4 from x0 to t_end.

    dt is shortened so that a whole number of steps lands on t_end.
    States are kept every `sample_every` steps; t=0 and t=t_end always are.
    """
    require_valid(p)
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (4,):
        raise ValueError(f"x0 must be a 4-vector, got shape {x.shape}")
    if np.any(x < 0.0):
        raise ValueError(f"x0 must be componentwise >= 0, got {x.tolist()}")
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not t_end >= 0.0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")

    n_steps = math.ceil(t_end / dt - 1e-9) if t_end > 0.0 else 0
    h = t_end / n_steps if n_steps else 0.0

    def rhs(state: np.ndarray) -> np.ndarray:
        return kinetics(state, p)

    times = [0.0]
    states = [x.copy()]
    for i in range(1, n_steps + 1):
        x = rk4_step(rhs, x, h)
        if not np.all(np.isfinite(x)) or np.any(x < -NEGATIVE_TOL):
            raise StepTooLarge(
                f"state left the admissible region at t={i * h!r} with dt={h!r}: {x.tolist()}"
            )
        if i % sample_every == 0 or i == n_steps:
            times.append(t_end if i == n_steps else i * h)
            states.append(x.copy())

    return Trajectory(times=np.array(times), states=np.array(states))


class StepTooLarge(RuntimeError):
    """Raised when an RK4 step drives the state negative or non-finite."""
    pass
