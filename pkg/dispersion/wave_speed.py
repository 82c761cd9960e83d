"""
dispersion/wave_speed.py
────────────────────────
Minimal wave speed c* = min over lambda > 0 of c_lambda, and the two decay
rates at which a supercritical speed c is attained.

c_lambda tends to +inf at both ends of (0, inf) and has a single interior
minimum, so:
  1. expand a bracket upward by doubling until c_lambda starts to increase,
  2. shrink it by golden-section search to relative width 1e-10,
  3. polish lambda* by bisection on lambda*alpha_max'(lambda) - alpha_max(lambda),
     which is strictly increasing and vanishes exactly at the minimiser.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from dispersion.branches import alpha_branch_arrays, alpha_branches, alpha_max_slope, wave_speed_at
from model_core.derived import derived_quantities
from schemas.params_schema import ModelParams

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 1/phi

LAMBDA_FLOOR = 1e-6
GOLDEN_REL_WIDTH = 1e-10
ROOT_REL_TOL = 1e-12
MAX_EXPANSIONS = 200
MAX_BISECTIONS = 400


@dataclass(frozen=True)
class DispersionResult:
    c_star:      float
    lambda_star: float
    curve:       tuple[tuple[float, float], ...]  # (lambda, c_lambda), increasing lambda

    def __post_init__(self):
        if not (self.c_star > 0 and self.lambda_star > 0):
            raise ValueError(
                f"c_star and lambda_star must be positive, got {self.c_star}, {self.lambda_star}"
            )


# ─────────────────────────────────────────────────────────────────────────────
# SCALAR SEARCH HELPERS
# ─────────────────────────────────────────────────────────────────────────────

def golden_section(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_width: float = GOLDEN_REL_WIDTH,
) -> tuple[float, float]:
    """Shrinks [a, b] around the minimiser of a unimodal f."""
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > rel_width * 0.5 * (a + b):
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_PHI * (b - a)
            f2 = f(x2)
    return a, b


def bisect_increasing(
    g: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = ROOT_REL_TOL,
) -> float:
    """Root of g on [lo, hi] given g(lo) <= 0 <= g(hi)."""
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rel_tol * mid or mid in (lo, hi):
            return mid
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ─────────────────────────────────────────────────────────────────────────────
# MINIMAL SPEED
# ─────────────────────────────────────────────────────────────────────────────

def minimal_wave_speed(p: ModelParams, samples: int = 200) -> DispersionResult:
    dq = derived_quantities(p)
    if dq.alpha_max_zero <= 0.0:
        raise SubcriticalR0(
            f"alpha_max(0) = {dq.alpha_max_zero!r} <= 0 (r0 = {dq.r0!r}): no minimal wave speed"
        )

    def speed(lam: float) -> float:
        return wave_speed_at(lam, p)

    lo, hi = LAMBDA_FLOOR, 1.0
    for _ in range(MAX_EXPANSIONS):
        if speed(2.0 * hi) > speed(hi):
            break
        lo, hi = hi, 2.0 * hi
    hi = 2.0 * hi
    for _ in range(MAX_EXPANSIONS):
        if speed(0.5 * lo) >= speed(lo):
            break
        lo *= 0.5

    a, b = golden_section(speed, lo, hi)

    def tangency(lam: float) -> float:
        return lam * alpha_max_slope(lam, p) - alpha_branches(lam, p).alpha_max

    a *= 1.0 - 1e-6
    b *= 1.0 + 1e-6
    for _ in range(MAX_EXPANSIONS):
        if tangency(a) <= 0.0:
            break
        a *= 0.5
    for _ in range(MAX_EXPANSIONS):
        if tangency(b) >= 0.0:
            break
        b *= 2.0
    lambda_star = bisect_increasing(tangency, a, b, rel_tol=4.0 * np.finfo(float).eps)
    c_star = speed(lambda_star)

    grid = np.geomspace(lambda_star / 20.0, lambda_star * 20.0, max(samples, 200))
    curve = tuple((float(lam), speed(float(lam))) for lam in grid)

    return DispersionResult(c_star=c_star, lambda_star=lambda_star, curve=curve)


def sample_curve(
    p: ModelParams,
    lambda_min: float,
    lambda_max: float,
    samples: int,
) -> list[tuple[float, float, float, float]]:
    """Log-spaced rows (lambda, alpha_min, alpha_max, c_lambda)."""
    if not (0.0 < lambda_min < lambda_max) or samples < 2:
        raise ValueError(
            f"need 0 < lambda_min < lambda_max and samples >= 2, got "
            f"[{lambda_min}, {lambda_max}] with {samples} samples"
        )
    lams = np.geomspace(lambda_min, lambda_max, samples)
    alpha_min, alpha_max = alpha_branch_arrays(lams, p)
    return [
        (float(lam), float(lo), float(hi), float(hi / lam))
        for lam, lo, hi in zip(lams, alpha_min, alpha_max)
    ]


# ─────────────────────────────────────────────────────────────────────────────
# ROOTS OF c_lambda = c
# ─────────────────────────────────────────────────────────────────────────────

def lambda_roots(
    c: float,
    p: ModelParams,
    result: Optional[DispersionResult] = None,
) -> tuple[float, float]:
    """
    The two solutions lambda_min < lambda* < lambda_max of c_lambda = c.
    Pass a precomputed DispersionResult to skip the minimisation.
    """
    if not math.isfinite(c):
        raise ValueError(f"wave speed must be finite, got {c!r}")
    result = result or minimal_wave_speed(p)
    if not c > result.c_star:
        raise SpeedNotSupercritical(f"c = {c!r} is not above c* = {result.c_star!r}")

    lam_star = result.lambda_star

    def excess(lam: float) -> float:
        return wave_speed_at(lam, p) - c

    lo = 0.5 * lam_star
    for _ in range(MAX_EXPANSIONS):
        if excess(lo) > 0.0:
            break
        lo *= 0.5
    hi = 2.0 * lam_star
    for _ in range(MAX_EXPANSIONS):
        if excess(hi) > 0.0:
            break
        hi *= 2.0

    # excess decreases on (0, lambda*) and increases afterwards
    tol = 4.0 * np.finfo(float).eps
    lambda_min = bisect_increasing(lambda lam: -excess(lam), lo, lam_star, rel_tol=tol)
    lambda_max = bisect_increasing(excess, lam_star, hi, rel_tol=tol)
    return lambda_min, lambda_max


class SubcriticalR0(ValueError):
    """Raised when alpha_max(0) <= 0 so no wave speed exists."""
    pass


class SpeedNotSupercritical(ValueError):
    """Raised when a requested speed does not exceed c*."""
    pass
