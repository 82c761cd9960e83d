"""
dispersion/branches.py
──────────────────────
Linearisation of the infected compartments at the disease-free state.

For a trial profile e^{lambda*y}(k2, k4) the linear system reduces to the
2x2 matrix

    M(lambda) = [[ d_h*lambda^2 - l0 ,  beta2*b1/mu       ],
                 [ beta*b2/eta       ,  d_v*lambda^2 - eta ]]

whose eigenvalues alpha_min(lambda) < alpha_max(lambda) are the two
dispersion branches. Both off-diagonal entries are positive, so alpha_max
carries a strictly positive eigenvector, normalised here to k2 = 1.

c_lambda = alpha_max(lambda) / lambda is the speed of the exponential
solution with decay rate lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from model_core.derived import derived_quantities, eigen_pair
from schemas.params_schema import ModelParams


@dataclass(frozen=True)
class DispersionMatrix:
    lam:        float  # wavenumber
    m1:         float  # d_h*lambda^2 - l0
    m2:         float  # d_v*lambda^2 - eta
    offdiag_12: float  # beta2*b1/mu
    offdiag_21: float  # beta*b2/eta

    def __post_init__(self):
        if not (self.offdiag_12 > 0 and self.offdiag_21 > 0):
            raise ValueError(
                f"off-diagonal entries must be positive, got "
                f"{self.offdiag_12}, {self.offdiag_21}"
            )

    @property
    def l1(self) -> float:
        return self.offdiag_12 * self.offdiag_21

    def as_array(self) -> np.ndarray:
        return np.array(
            [[self.m1, self.offdiag_12],
             [self.offdiag_21, self.m2]],
            dtype=float,
        )


@dataclass(frozen=True)
class EigenBranch:
    alpha_min:  float
    alpha_max:  float
    eigvec_max: tuple[float, float]  # (k2, k4), k2 = 1

    def __post_init__(self):
        k2, k4 = self.eigvec_max
        if not (k2 > 0 and k4 > 0):
            raise ValueError(f"principal eigenvector must be positive, got {self.eigvec_max}")
        if not self.alpha_min < self.alpha_max:
            raise ValueError(f"branches out of order: {self.alpha_min} >= {self.alpha_max}")


def dispersion_matrix(lam: float, p: ModelParams) -> DispersionMatrix:
    dq = derived_quantities(p)
    return DispersionMatrix(
        lam=lam,
        m1=p.d_h * lam * lam - dq.l0,
        m2=p.d_v * lam * lam - p.eta,
        offdiag_12=p.beta2 * p.b1 / p.mu,
        offdiag_21=p.beta * p.b2 / p.eta,
    )


def alpha_branches(lam: float, p: ModelParams) -> EigenBranch:
    mat = dispersion_matrix(lam, p)
    l1 = mat.l1
    alpha_min, alpha_max = eigen_pair(mat.m1, mat.m2, l1)

    # alpha_max - m1 without cancellation
    gap = mat.m1 - mat.m2
    root = math.sqrt(gap * gap + 4.0 * l1)
    if gap <= 0.0:
        lead = 0.5 * (root - gap)
    else:
        lead = 2.0 * l1 / (root + gap)

    k4 = lead / mat.offdiag_12
    return EigenBranch(alpha_min=alpha_min, alpha_max=alpha_max, eigvec_max=(1.0, k4))


def alpha_branch_arrays(lams, p: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised (alpha_min, alpha_max) over an array of wavenumbers."""
    dq = derived_quantities(p)
    lam = np.asarray(lams, dtype=float)
    m1 = p.d_h * lam * lam - dq.l0
    m2 = p.d_v * lam * lam - p.eta
    l1 = (p.beta2 * p.b1 / p.mu) * (p.beta * p.b2 / p.eta)

    total = m1 + m2
    root = np.sqrt((m1 - m2) ** 2 + 4.0 * l1)
    product = m1 * m2 - l1
    low, high = 0.5 * (total - root), 0.5 * (total + root)
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha_min = np.where(total <= 0.0, low, product / high)
        alpha_max = np.where(total <= 0.0, product / low, high)
    return alpha_min, alpha_max


def alpha_max_slope(lam: float, p: ModelParams) -> float:
    """d alpha_max / d lambda."""
    mat = dispersion_matrix(lam, p)
    gap = mat.m1 - mat.m2
    root = math.sqrt(gap * gap + 4.0 * mat.l1)
    return lam * ((p.d_h + p.d_v) + (p.d_h - p.d_v) * gap / root)


def wave_speed_at(lam: float, p: ModelParams) -> float:
    if not (math.isfinite(lam) and lam > 0.0):
        raise NonpositiveLambda(f"lambda must be positive and finite, got {lam!r}")
    return alpha_branches(lam, p).alpha_max / lam


class NonpositiveLambda(ValueError):
    """Raised when c_lambda is requested at lambda <= 0."""
    pass
