"""
certificates/supersub.py
────────────────────────
Upper and lower travelling-wave profiles built from the linearisation at the
disease-free state, and a numerical check that they really are upper and
lower solutions of the wave equations  0 = D*x'' - c*x' + F(x).

For a speed c > c* with lambda = lambda_min(c) (so c_lambda = c):

  upper  x1 = b1/mu                 x2 = k2(l)*e^{l*y}
         x3 = b2/eta                x4 = k4(l)*e^{l*y}

  lower  x1 = (b1/mu  - A*e^{lt*y})+
         x2 = (k2(l) - B*k2(l+k)*e^{k*y})+ * e^{l*y}
         x3 = (b2/eta - A*e^{lt*y})+
         x4 = (k4(l) - B*k4(l+k)*e^{k*y})+ * e^{l*y}

with l = lambda, k = kappa, lt = lambda_tilde and (k2, k4) the principal
eigenvector of M normalised to k2 = 1. Every profile is a sum of
exponentials, so first and second derivatives are exact.

Checks reported by verify_supersub():
  identity_at_lambda        linear system residual of the upper pair at lambda, speed c
  identity_at_lambda_kappa  same at lambda + kappa, speed c_{lambda+kappa}
  host_susceptible          lower x1 against the upper infected pair
  vector_susceptible        lower x3 against the upper infected host
  host_infected             lower x2 (where switched on)
  vector_infected           lower x4 (where switched on)

Each check reports the raw residual (worst) against the absolute tolerance
1e-10, and beside it the residual divided by max(1, sum of |terms|)
(worst_relative), which shows how far a failure sits above rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from dispersion.branches import alpha_branches, wave_speed_at
from dispersion.wave_speed import DispersionResult, lambda_roots, minimal_wave_speed
from model_core.derived import derived_quantities
from schemas.params_schema import ModelParams

RESIDUAL_TOL = 1e-10
MARGIN = 1.01
MAX_DOUBLINGS = 2000


@dataclass(frozen=True)
class CertificateParams:
    lam:          float
    kappa:        float
    lambda_tilde: float
    A:            float
    B:            float

    def __post_init__(self):
        for name in ("lam", "kappa", "lambda_tilde", "A", "B"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise InvalidCertificate(f"CertificateParams.{name} must be positive and finite, got {value!r}")

    def as_dict(self) -> dict[str, float]:
        return {
            "lambda":       self.lam,
            "kappa":        self.kappa,
            "lambda_tilde": self.lambda_tilde,
            "A":            self.A,
            "B":            self.B,
        }


@dataclass(frozen=True)
class WaveProfilePair:
    cert:            CertificateParams
    host_total:      float  # b1/mu
    vector_total:    float  # b2/eta
    k2_lambda:       float
    k4_lambda:       float
    k2_lambda_kappa: float
    k4_lambda_kappa: float

    def upper(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        grow = np.exp(self.cert.lam * y)
        return np.stack([
            np.full_like(y, self.host_total),
            self.k2_lambda * grow,
            np.full_like(y, self.vector_total),
            self.k4_lambda * grow,
        ])

    def upper_shifted(self, y) -> np.ndarray:
        """Infected pair of the upper family at lambda + kappa."""
        y = np.asarray(y, dtype=float)
        grow = np.exp((self.cert.lam + self.cert.kappa) * y)
        return np.stack([self.k2_lambda_kappa * grow, self.k4_lambda_kappa * grow])

    def _arguments(self, y: np.ndarray) -> tuple[np.ndarray, ...]:
        """Untruncated lower profiles and their first two derivatives."""
        cert = self.cert
        lt, lam, lk = cert.lambda_tilde, cert.lam, cert.lam + cert.kappa
        e_t = cert.A * np.exp(lt * y)
        e_l = np.exp(lam * y)
        e_k = cert.B * np.exp(lk * y)

        value = np.stack([
            self.host_total - e_t,
            self.k2_lambda * e_l - self.k2_lambda_kappa * e_k,
            self.vector_total - e_t,
            self.k4_lambda * e_l - self.k4_lambda_kappa * e_k,
        ])
        first = np.stack([
            -lt * e_t,
            lam * self.k2_lambda * e_l - lk * self.k2_lambda_kappa * e_k,
            -lt * e_t,
            lam * self.k4_lambda * e_l - lk * self.k4_lambda_kappa * e_k,
        ])
        second = np.stack([
            -lt * lt * e_t,
            lam * lam * self.k2_lambda * e_l - lk * lk * self.k2_lambda_kappa * e_k,
            -lt * lt * e_t,
            lam * lam * self.k4_lambda * e_l - lk * lk * self.k4_lambda_kappa * e_k,
        ])
        return value, first, second

    def active(self, y) -> np.ndarray:
        """Where the positive part of each lower profile is switched on."""
        value, _, _ = self._arguments(np.asarray(y, dtype=float))
        return value > 0.0

    def lower(self, y) -> np.ndarray:
        value, _, _ = self._arguments(np.asarray(y, dtype=float))
        return np.maximum(value, 0.0)

    def lower_derivatives(self, y) -> tuple[np.ndarray, np.ndarray]:
        """(first, second) derivatives; zero where a profile is switched off."""
        value, first, second = self._arguments(np.asarray(y, dtype=float))
        on = value > 0.0
        return np.where(on, first, 0.0), np.where(on, second, 0.0)

    def switch_points(self) -> tuple[float, float, float, float]:
        """y at which each lower profile meets zero."""
        cert = self.cert
        return (
            math.log(self.host_total / cert.A) / cert.lambda_tilde,
            -math.log(cert.B * self.k2_lambda_kappa / self.k2_lambda) / cert.kappa,
            math.log(self.vector_total / cert.A) / cert.lambda_tilde,
            -math.log(cert.B * self.k4_lambda_kappa / self.k4_lambda) / cert.kappa,
        )


@dataclass(frozen=True)
class ProfileSamples:
    y:             np.ndarray
    upper:         np.ndarray  # (4, m)
    upper_shifted: np.ndarray  # (2, m): infected pair at lambda + kappa
    lower:         np.ndarray  # (4, m)
    lower_d1:      np.ndarray  # (4, m)
    lower_d2:      np.ndarray  # (4, m)
    active:        np.ndarray  # (4, m) bool
    pair:          WaveProfilePair


def profile_pair(cert: CertificateParams, p: ModelParams) -> WaveProfilePair:
    k2, k4 = alpha_branches(cert.lam, p).eigvec_max
    k2s, k4s = alpha_branches(cert.lam + cert.kappa, p).eigvec_max
    return WaveProfilePair(
        cert=cert,
        host_total=p.b1 / p.mu,
        vector_total=p.b2 / p.eta,
        k2_lambda=k2,
        k4_lambda=k4,
        k2_lambda_kappa=k2s,
        k4_lambda_kappa=k4s,
    )


def evaluate_profiles(cert: CertificateParams, p: ModelParams, y) -> ProfileSamples:
    """Both profile families at the points y, with exact derivatives of the lower one."""
    y = np.asarray(y, dtype=float)
    pair = profile_pair(cert, p)
    d1, d2 = pair.lower_derivatives(y)
    return ProfileSamples(
        y=y,
        upper=pair.upper(y),
        upper_shifted=pair.upper_shifted(y),
        lower=pair.lower(y),
        lower_d1=d1,
        lower_d2=d2,
        active=pair.active(y),
        pair=pair,
    )


# ─────────────────────────────────────────────────────────────────────────────
# ADMISSIBILITY BOUNDS
# ─────────────────────────────────────────────────────────────────────────────

def lambda_tilde_bound(lam: float, c: float, p: ModelParams) -> float:
    return min(lam, c / (p.d_h + p.d_v))


def a_lower_bound(lam: float, lambda_tilde: float, p: ModelParams) -> float:
    """
    Smallest admissible A. Besides the host term, the literal eta*mu/(b2*k2)
    term is kept and beta*b2*k2/eta^2 is added: the latter is what the
    vector-susceptible inequality needs as y -> -inf. When lambda_tilde < lambda
    the susceptible lower profiles must also vanish for y > 0.
    """
    k2, k4 = alpha_branches(lam, p).eigvec_max
    terms = [
        1.0,
        p.b1 * (p.beta2 * k4 + p.beta1 * k2) / p.mu ** 2,
        p.eta * p.mu / (p.b2 * k2),
        p.beta * p.b2 * k2 / p.eta ** 2,
    ]
    if lambda_tilde < lam:
        terms += [p.b1 / p.mu, p.b2 / p.eta]
    return max(terms)


def b_lower_bound(lam: float, kappa: float, A: float, c: float, p: ModelParams) -> float:
    """Smallest B allowed by the infected-class inequalities (B0 not included)."""
    k2, k4 = alpha_branches(lam, p).eigvec_max
    k2s, k4s = alpha_branches(lam + kappa, p).eigvec_max
    c_shift = wave_speed_at(lam + kappa, p)
    gap = (lam + kappa) * (c - c_shift)
    if not gap > 0.0:
        raise InvalidCertificate(
            f"c_(lambda+kappa) = {c_shift!r} must stay below c = {c!r}; kappa too large"
        )
    host = A * (p.beta1 * k2 + p.beta2 * max(k4, k4s)) / (gap * k2s)
    vector = A * p.beta * k2 / (gap * k4s)
    return max(1.0, host, vector)


def b0_separation(
    lam: float,
    kappa: float,
    lambda_tilde: float,
    A: float,
    B: float,
    p: ModelParams,
) -> tuple[float, float]:
    """
    (lhs, rhs) of the switch-point separation: the infected lower profiles
    must switch off before (to the left of) the susceptible ones and at y < 0.
    Holds when lhs > rhs.
    """
    k2, k4 = alpha_branches(lam, p).eigvec_max
    k2s, k4s = alpha_branches(lam + kappa, p).eigvec_max
    lhs = min(math.log(B * k2s / k2), math.log(B * k4s / k4)) / kappa
    rhs = max(math.log(A / (p.b1 / p.mu)), math.log(A / (p.b2 / p.eta))) / lambda_tilde
    return lhs, max(rhs, 0.0)


# ─────────────────────────────────────────────────────────────────────────────
# CONSTRUCTION
# ─────────────────────────────────────────────────────────────────────────────

def default_certificate(
    c: float,
    p: ModelParams,
    result: Optional[DispersionResult] = None,
) -> CertificateParams:
    result = result or minimal_wave_speed(p)
    lam, _ = lambda_roots(c, p, result)
    lambda_tilde = lambda_tilde_bound(lam, c, p)
    A = MARGIN * a_lower_bound(lam, lambda_tilde, p)
    kappa = 0.5 * min(lambda_tilde, result.lambda_star - lam)

    b0 = 1.0
    for _ in range(MAX_DOUBLINGS):
        lhs, rhs = b0_separation(lam, kappa, lambda_tilde, A, b0, p)
        if lhs > rhs:
            break
        b0 *= 2.0
    B = MARGIN * max(b_lower_bound(lam, kappa, A, c, p), b0)
    print(f"[certificates] c={c!r}: lambda={lam!r} kappa={kappa!r} A={A!r} B={B!r}")
    return CertificateParams(lam=lam, kappa=kappa, lambda_tilde=lambda_tilde, A=A, B=B)


@dataclass
class ConstraintCheck:
    name:   str
    value:  float
    bound:  float
    passed: bool


@dataclass
class ConstraintReport:
    checks: list[ConstraintCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def get(self, name: str) -> ConstraintCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(f"Unknown constraint '{name}'. Available: {[c.name for c in self.checks]}")


def check_constraints(
    cert: CertificateParams,
    c: float,
    p: ModelParams,
    result: Optional[DispersionResult] = None,
) -> ConstraintReport:
    """Re-evaluates every admissibility inequality of a certificate."""
    result = result or minimal_wave_speed(p)
    report = ConstraintReport()
    add = report.checks.append

    add(ConstraintCheck("lambda_below_lambda_star", cert.lam, result.lambda_star, cert.lam < result.lambda_star))
    lt_bound = lambda_tilde_bound(cert.lam, c, p)
    add(ConstraintCheck("lambda_tilde_bound", cert.lambda_tilde, lt_bound, cert.lambda_tilde <= lt_bound * (1 + 1e-12)))
    a_bound = a_lower_bound(cert.lam, cert.lambda_tilde, p)
    add(ConstraintCheck("A_bound", cert.A, a_bound, cert.A >= a_bound))
    k_bound = min(cert.lambda_tilde, result.lambda_star - cert.lam)
    add(ConstraintCheck("kappa_bound", cert.kappa, k_bound, cert.kappa < k_bound))

    try:
        b_bound = b_lower_bound(cert.lam, cert.kappa, cert.A, c, p)
    except InvalidCertificate:
        b_bound = math.inf
    add(ConstraintCheck("B_bound", cert.B, b_bound, cert.B >= b_bound))
    lhs, rhs = b0_separation(cert.lam, cert.kappa, cert.lambda_tilde, cert.A, cert.B, p)
    add(ConstraintCheck("B0_separation", lhs, rhs, lhs > rhs))
    return report


# ─────────────────────────────────────────────────────────────────────────────
# VERIFICATION
# ─────────────────────────────────────────────────────────────────────────────

@dataclass
class ResidualCheck:
    name:    str
    kind:    Literal["identity", "inequality"]
    worst:          float            # identity: max |residual|, inequality: min residual
    worst_y:        Optional[float]
    points:         int              # grid points evaluated
    passed:         bool
    worst_relative: float            # same reduction over residual / max(1, sum |terms|)


@dataclass
class SupersubReport:
    checks:      list[ResidualCheck]
    ordering_ok: bool

    @property
    def success(self) -> bool:
        return self.ordering_ok and all(check.passed for check in self.checks)

    def get(self, name: str) -> ResidualCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(f"Unknown check '{name}'. Available: {[c.name for c in self.checks]}")


def _residual(terms: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Raw residual and the residual relative to max(1, sum of |terms|)."""
    total = sum(terms)
    scale = np.maximum(1.0, sum(np.abs(t) for t in terms))
    return total, total / scale


def _identity_check(
    name: str,
    residuals: list[tuple[np.ndarray, np.ndarray]],
    y: np.ndarray,
) -> ResidualCheck:
    magnitude = np.maximum.reduce([np.abs(raw) for raw, _ in residuals])
    relative = np.maximum.reduce([np.abs(rel) for _, rel in residuals])
    i = int(np.argmax(magnitude))
    worst = float(magnitude[i])
    return ResidualCheck(
        name, "identity", worst, float(y[i]), y.size, worst <= RESIDUAL_TOL, float(relative.max()),
    )


def _inequality_check(
    name: str,
    residual: tuple[np.ndarray, np.ndarray],
    y: np.ndarray,
    mask: np.ndarray,
) -> ResidualCheck:
    if not mask.any():
        return ResidualCheck(name, "inequality", 0.0, None, 0, True, 0.0)
    raw, rel = residual
    values = np.where(mask, raw, np.inf)
    i = int(np.argmin(values))
    worst = float(values[i])
    return ResidualCheck(
        name, "inequality", worst, float(y[i]), int(mask.sum()), worst >= -RESIDUAL_TOL,
        float(np.min(np.where(mask, rel, np.inf))),
    )


def verify_supersub(
    cert: CertificateParams,
    c: float,
    p: ModelParams,
    y_grid,
) -> SupersubReport:
    y = np.asarray(y_grid, dtype=float)
    if y.ndim != 1 or y.size == 0 or not np.all(np.isfinite(y)):
        raise ValueError("y_grid must be a non-empty 1-D array of finite values")
    if np.any(np.diff(y) < 0):
        raise ValueError("y_grid must be sorted")

    dq = derived_quantities(p)
    cross_h = p.beta2 * p.b1 / p.mu
    cross_v = p.beta * p.b2 / p.eta
    lam, lk = cert.lam, cert.lam + cert.kappa
    c_shift = wave_speed_at(lk, p)

    samples = evaluate_profiles(cert, p, y)
    up, up_s, low = samples.upper, samples.upper_shifted, samples.lower
    d1, d2 = samples.lower_d1, samples.lower_d2
    on = samples.active.copy()

    # positive-part kinks are excluded within one grid step
    dx = float(np.max(np.diff(y))) if y.size > 1 else 0.0
    for i, y_switch in enumerate(samples.pair.switch_points()):
        on[i] &= np.abs(y - y_switch) > dx

    checks: list[ResidualCheck] = []

    ident = []
    for rate, speed, (u2, u4) in ((lam, c, (up[1], up[3])), (lk, c_shift, (up_s[0], up_s[1]))):
        host = _residual([p.d_h * rate * rate * u2, -speed * rate * u2, -dq.l0 * u2, cross_h * u4])
        vector = _residual([p.d_v * rate * rate * u4, -speed * rate * u4, -p.eta * u4, cross_v * u2])
        ident.append([host, vector])
    checks.append(_identity_check("identity_at_lambda", ident[0], y))
    checks.append(_identity_check("identity_at_lambda_kappa", ident[1], y))

    w1, w2, w3, w4 = low
    host_s = _residual([
        p.d_h * d2[0], -c * d1[0], np.full_like(y, p.b1),
        -(p.mu + p.beta2 * up[3] + p.beta1 * up[1]) * w1,
    ])
    vector_s = _residual([
        p.d_v * d2[2], -c * d1[2], np.full_like(y, p.b2),
        -(p.eta + p.beta * up[1]) * w3,
    ])
    host_i = _residual([
        p.d_h * d2[1], -c * d1[1], p.beta1 * w1 * w2, -(p.phi + p.mu) * w2, p.beta2 * w1 * w4,
    ])
    vector_i = _residual([
        p.d_v * d2[3], -c * d1[3], -p.eta * w4, p.beta * w2 * w3,
    ])
    checks.append(_inequality_check("host_susceptible", host_s, y, on[0]))
    checks.append(_inequality_check("vector_susceptible", vector_s, y, on[2]))
    checks.append(_inequality_check("host_infected", host_i, y, on[1]))
    checks.append(_inequality_check("vector_infected", vector_i, y, on[3]))

    ordering_ok = bool(np.all(low >= 0.0) and np.all(low <= up))
    return SupersubReport(checks=checks, ordering_ok=ordering_ok)


def default_grid(cert: CertificateParams, points: int = 2001) -> np.ndarray:
    """Grid spanning [-5/kappa, 5/lambda_tilde]."""
    return np.linspace(-5.0 / cert.kappa, 5.0 / cert.lambda_tilde, points)


class InvalidCertificate(ValueError):
    """Raised when certificate parameters violate an open-interval constraint."""
    pass
