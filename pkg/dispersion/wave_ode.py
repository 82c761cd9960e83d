"""
dispersion/wave_ode.py
──────────────────────
Spectrum of the linearised travelling-wave equations at the disease-free state.

In the co-moving coordinate the infected pair satisfies

    0 = d_h*x2'' - c*x2' - l0*x2 + (beta2*b1/mu)*x4
    0 = d_v*x4'' - c*x4' - eta*x4 + (beta*b2/eta)*x2

Written as a first-order system for (x2, x4, x2', x4') this is a 4x4 matrix
whose characteristic polynomial is the quartic

    P(lambda) = ((m1(lambda) - lambda*c)(m2(lambda) - lambda*c) - l1) / (d_h*d_v)

so every real eigenvalue lambda has lambda*c equal to alpha_min(lambda) or
alpha_max(lambda). Real roots are isolated by a sign-change scan over a
Cauchy bound interval and refined by bisection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from dispersion.branches import alpha_branches, dispersion_matrix
from model_core.derived import derived_quantities
from schemas.params_schema import ModelParams

BranchTag = Literal["min", "max", "unclassified"]

SCAN_POINTS = 10_000
CLASSIFY_REL_TOL = 1e-8


@dataclass(frozen=True)
class WaveOdeSpectrum:
    c:                float
    quartic_coeffs:   tuple[float, float, float, float, float]  # highest degree first
    real_eigenvalues: tuple[float, ...]                         # increasing
    classification:   tuple[BranchTag, ...]

    def __post_init__(self):
        if len(self.real_eigenvalues) != len(self.classification):
            raise ValueError("one branch tag is required per real eigenvalue")

    @property
    def p_at_zero(self) -> float:
        return self.quartic_coeffs[-1]


def wave_ode_matrix(c: float, p: ModelParams) -> np.ndarray:
    dq = derived_quantities(p)
    cross_h = p.beta2 * p.b1 / p.mu
    cross_v = p.beta * p.b2 / p.eta
    return np.array(
        [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [dq.l0 / p.d_h, -cross_h / p.d_h, c / p.d_h, 0.0],
            [-cross_v / p.d_v, p.eta / p.d_v, 0.0, c / p.d_v],
        ],
        dtype=float,
    )


def quartic_coefficients(c: float, p: ModelParams) -> np.ndarray:
    """Monomial coefficients of P, highest degree first (numpy.polyval order)."""
    dq = derived_quantities(p)
    a = c / p.d_h
    b = c / p.d_v
    return np.array(
        [
            1.0,
            -(a + b),
            a * b - p.eta / p.d_v - dq.l0 / p.d_h,
            c * (p.eta + dq.l0) / (p.d_h * p.d_v),
            -(dq.l1 - dq.l0 * p.eta) / (p.d_v * p.d_h),
        ],
        dtype=float,
    )


def real_roots(coeffs: np.ndarray, scan_points: int = SCAN_POINTS) -> list[float]:
    """
    Real roots of a monic polynomial with a sign change, in increasing order.
    Roots of even multiplicity (no sign change) are not reported.
    """
    bound = 1.0 + float(np.max(np.abs(coeffs[1:] / coeffs[0])))
    grid = np.linspace(-bound, bound, scan_points + 1)
    values = np.polyval(coeffs, grid)

    roots: list[float] = []
    for i in range(scan_points):
        lo, hi = float(grid[i]), float(grid[i + 1])
        f_lo, f_hi = float(values[i]), float(values[i + 1])
        if f_lo == 0.0:
            roots.append(lo)
            continue
        if f_lo * f_hi >= 0.0:
            continue
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            f_mid = float(np.polyval(coeffs, mid))
            if f_mid == 0.0:
                lo = hi = mid
                break
            if (f_mid < 0.0) == (f_lo < 0.0):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def classify_root(lam: float, c: float, p: ModelParams) -> BranchTag:
    """Which dispersion branch lambda*c lands on."""
    branch = alpha_branches(lam, p)
    mat = dispersion_matrix(lam, p)
    scale = max(abs(mat.m1), abs(mat.m2), mat.l1 ** 0.5, abs(lam * c), 1e-300)
    gap_min = abs(lam * c - branch.alpha_min)
    gap_max = abs(lam * c - branch.alpha_max)
    if min(gap_min, gap_max) > CLASSIFY_REL_TOL * scale:
        return "unclassified"
    return "min" if gap_min <= gap_max else "max"


def wave_ode_spectrum(c: float, p: ModelParams) -> WaveOdeSpectrum:
    coeffs = quartic_coefficients(c, p)
    roots = real_roots(coeffs)
    tags = tuple(classify_root(lam, c, p) for lam in roots)
    return WaveOdeSpectrum(
        c=c,
        quartic_coeffs=tuple(float(v) for v in coeffs),
        real_eigenvalues=tuple(roots),
        classification=tags,
    )
