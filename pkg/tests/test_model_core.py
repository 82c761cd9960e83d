"""
tests/test_model_core.py
────────────────────────
Parameters, derived quantities, equilibria and the homogeneous kinetics.

Run:
  pytest tests/test_model_core.py -v
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from model_core.derived import (
    InvalidParams,
    derived_quantities,
    eigen_pair,
    host_lower_bound,
    load_params,
    max_reaction_rate,
    require_valid,
    vector_lower_bound,
)
from model_core.equilibria import (
    Equilibrium,
    NoEndemicEquilibrium,
    disease_free_equilibrium,
    endemic_equilibrium,
    endemic_quadratic,
)
from model_core.kinetics import StepTooLarge, integrate_kinetics, kinetics
from schemas.params_schema import PARAM_KEYS, ModelParams


REF = ModelParams.reference()
SUBCRITICAL = REF.with_updates(beta1=REF.beta1 / 100, beta2=REF.beta2 / 100)


def random_params(rng: np.random.Generator, low: float = 0.1, high: float = 10.0) -> ModelParams:
    """Log-uniform draw of every rate."""
    draws = np.exp(rng.uniform(math.log(low), math.log(high), size=len(PARAM_KEYS)))
    return ModelParams(**{key: float(v) for key, v in zip(PARAM_KEYS, draws)})


# ─────────────────────────────────────────────────────────────────────────────
# PARAMETERS
# ─────────────────────────────────────────────────────────────────────────────

class TestParams:

    def test_reference_values(self):
        assert REF.mu == 0.83
        assert REF.b1 == 100
        assert REF.d_v == 0.5

    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
    def test_nonpositive_or_nonfinite_rate_rejected(self, bad):
        with pytest.raises(ValidationError):
            ModelParams(**{**REF.as_dict(), "eta": bad})

    def test_load_params_reports_invalid_params(self):
        with pytest.raises(InvalidParams):
            load_params({**REF.as_dict(), "mu": 0.0})

    def test_load_params_rejects_missing_rate(self):
        values = REF.as_dict()
        values.pop("beta")
        with pytest.raises(InvalidParams):
            load_params(values)

    def test_require_valid_catches_unvalidated_instances(self):
        broken = ModelParams.model_construct(**{**REF.as_dict(), "phi": -0.35})
        with pytest.raises(InvalidParams):
            require_valid(broken)

    def test_params_are_immutable(self):
        with pytest.raises(ValidationError):
            REF.mu = 1.0

    def test_with_updates_returns_new_instance(self):
        other = REF.with_updates(beta=0.002)
        assert other.beta == 0.002
        assert REF.beta == 0.0011


# ─────────────────────────────────────────────────────────────────────────────
# DERIVED QUANTITIES
# ─────────────────────────────────────────────────────────────────────────────

class TestDerivedQuantities:

    def test_reference_r0(self):
        dq = derived_quantities(REF)
        assert math.isclose(dq.r0, 34.20, abs_tol=0.01)
        assert dq.supercritical

    def test_reference_l0_l1(self):
        dq = derived_quantities(REF)
        assert math.isclose(dq.l0, 0.577590, abs_tol=1e-6)
        assert math.isclose(dq.l1, 0.0397590, abs_tol=1e-7)

    def test_reference_growth_rate(self):
        dq = derived_quantities(REF)
        assert math.isclose(dq.alpha_max_zero, 0.0612375, abs_tol=1e-6)

    def test_host_only_threshold(self):
        # with vector-to-host transmission switched (almost) off only the
        # host-to-host channel remains
        p = REF.with_updates(beta2=1e-12)
        expected = p.beta1 * p.b1 / (p.mu * (p.mu + p.phi))
        assert math.isclose(derived_quantities(p).r0, expected, rel_tol=1e-6)
        assert math.isclose(expected, 0.51052, abs_tol=1e-4)

    def test_subcritical_growth_rate_negative(self):
        dq = derived_quantities(SUBCRITICAL)
        assert dq.r0 < 1
        assert dq.alpha_max_zero < 0
        assert not dq.supercritical

    def test_growth_rate_sign_matches_threshold(self):
        rng = np.random.default_rng(7)
        checked = 0
        for _ in range(1000):
            p = random_params(rng, 1e-4, 1e2)
            dq = derived_quantities(p)
            if abs(dq.r0 - 1.0) <= 1e-9:
                continue
            assert (dq.alpha_max_zero > 0) == (dq.r0 > 1), p.as_dict()
            checked += 1
        assert checked > 900

    def test_eigen_pair_vieta(self):
        for m1, m2, l1 in [(-0.57759, -0.001, 0.039759), (3.0, 0.5, 1e-6), (-2.0, 5.0, 4.0)]:
            lo, hi = eigen_pair(m1, m2, l1)
            assert lo < min(m1, m2) and hi > max(m1, m2)
            assert math.isclose(lo + hi, m1 + m2, rel_tol=1e-12, abs_tol=1e-15)
            assert math.isclose(lo * hi, m1 * m2 - l1, rel_tol=1e-12, abs_tol=1e-15)

    def test_stability_rates(self):
        assert math.isclose(max_reaction_rate(REF), 0.83 + 0.35 + 0.005 * 100 / 0.83 + 0.003 * 100, rel_tol=1e-12)
        assert math.isclose(host_lower_bound(REF), 100 / (0.83 + 0.3 + 0.5 / 0.83), rel_tol=1e-12)
        assert math.isclose(vector_lower_bound(REF), 0.1 / 0.111, rel_tol=1e-12)

    def test_as_dict_keys(self):
        assert list(derived_quantities(REF).as_dict()) == ["r0", "l0", "l1", "alpha_max_zero"]


# ─────────────────────────────────────────────────────────────────────────────
# EQUILIBRIA
# ─────────────────────────────────────────────────────────────────────────────

def bisect_positive_root(k2: float, k1: float, k0: float) -> float:
    lo, hi = 0.0, 1e6
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if k2 * mid * mid + k1 * mid + k0 < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestEquilibria:

    def test_disease_free_reference(self):
        e0 = disease_free_equilibrium(REF)
        np.testing.assert_allclose(e0.as_array(), [120.48, 0.0, 100.0, 0.0], atol=0.01)

    def test_disease_free_unit_rates(self):
        p = REF.with_updates(b1=REF.mu, b2=REF.eta)
        np.testing.assert_allclose(disease_free_equilibrium(p).as_array(), [1.0, 0.0, 1.0, 0.0], rtol=1e-15)

    def test_disease_free_is_rest_state(self):
        f = kinetics(disease_free_equilibrium(REF).as_array(), REF)
        assert np.all(np.abs(f) <= 1e-12 * REF.b1)

    def test_endemic_reference(self):
        e1 = endemic_equilibrium(REF)
        np.testing.assert_allclose(e1.as_array(), [86.60, 33.87, 2.61, 97.38], atol=0.01)

    def test_endemic_is_rest_state(self):
        f = kinetics(endemic_equilibrium(REF).as_array(), REF)
        assert np.max(np.abs(f)) <= 1e-9

    def test_endemic_on_invariant_totals(self):
        e1 = endemic_equilibrium(REF)
        assert math.isclose(e1.x1 + e1.x2, REF.b1 / REF.mu, rel_tol=1e-10)
        assert math.isclose(e1.x3 + e1.x4, REF.b2 / REF.eta, rel_tol=1e-10)

    def test_endemic_root_matches_bisection(self):
        k2, k1, k0 = endemic_quadratic(REF)
        assert k2 > 0 and k0 < 0
        expected = bisect_positive_root(k2, k1, k0)
        assert math.isclose(endemic_equilibrium(REF).x2, expected, rel_tol=1e-9)

    def test_endemic_random_supercritical(self):
        rng = np.random.default_rng(11)
        checked = 0
        for _ in range(300):
            p = random_params(rng)
            if derived_quantities(p).r0 <= 1.0 + 1e-6:
                continue
            e1 = endemic_equilibrium(p)
            assert min(e1.x1, e1.x2, e1.x3, e1.x4) > 0
            scale = max(p.b1, p.b2, 1.0)
            assert np.max(np.abs(kinetics(e1.as_array(), p))) <= 1e-8 * scale
            checked += 1
        assert checked > 0

    def test_subcritical_has_no_endemic_state(self):
        with pytest.raises(NoEndemicEquilibrium):
            endemic_equilibrium(SUBCRITICAL)

    def test_equilibrium_rejects_negative_component(self):
        with pytest.raises(ValueError):
            Equilibrium(1.0, -0.1, 1.0, 0.0)

    def test_from_array_round_trip(self):
        e1 = endemic_equilibrium(REF)
        assert Equilibrium.from_array(e1.as_array()) == e1


# ─────────────────────────────────────────────────────────────────────────────
# KINETICS
# ─────────────────────────────────────────────────────────────────────────────

class TestKinetics:

    def test_infected_vector_seed(self):
        x = [REF.b1 / REF.mu, 0.0, REF.b2 / REF.eta, 1.0]
        f = kinetics(x, REF)
        assert math.isclose(f[1], 0.36145, abs_tol=1e-5)
        assert math.isclose(f[3], -0.001, abs_tol=1e-12)

    def test_totals_relax_linearly(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            x = rng.uniform(0.0, 200.0, size=4)
            f = kinetics(x, REF)
            assert math.isclose(f[0] + f[1], REF.b1 - REF.mu * (x[0] + x[1]), rel_tol=1e-12, abs_tol=1e-9)
            assert math.isclose(f[2] + f[3], REF.b2 - REF.eta * (x[2] + x[3]), rel_tol=1e-12, abs_tol=1e-9)

    def test_nodewise_evaluation(self):
        rng = np.random.default_rng(5)
        x = rng.uniform(0.0, 100.0, size=(4, 7))
        f = kinetics(x, REF)
        assert f.shape == (4, 7)
        for j in range(7):
            np.testing.assert_array_equal(f[:, j], kinetics(x[:, j], REF))


class TestIntegrateKinetics:

    def test_endemic_state_is_stationary(self):
        e1 = endemic_equilibrium(REF).as_array()
        traj = integrate_kinetics(e1, REF, t_end=100.0, dt=0.01, sample_every=1000)
        assert np.max(np.abs(traj.final - e1)) <= 1e-6

    def test_seeded_infection_reaches_endemic_state(self):
        e1 = endemic_equilibrium(REF)
        x0 = disease_free_equilibrium(REF).as_array() + np.array([0.0, 1e-3, 0.0, 0.0])
        traj = integrate_kinetics(x0, REF, t_end=2000.0, dt=0.05, sample_every=1000)
        assert math.isclose(traj.final[1], e1.x2, rel_tol=0.01)

    def test_subcritical_infection_dies_out(self):
        x0 = disease_free_equilibrium(SUBCRITICAL).as_array() + np.array([0.0, 1.0, 0.0, 1.0])
        traj = integrate_kinetics(x0, SUBCRITICAL, t_end=2000.0, dt=0.05, sample_every=1000)
        assert traj.final[1] < 1e-2
        assert traj.final[3] < 1.0

    def test_totals_conserved_on_invariant_set(self):
        s1, s3 = REF.b1 / REF.mu, REF.b2 / REF.eta
        x0 = np.array([s1 - 20.0, 20.0, s3 - 10.0, 10.0])
        traj = integrate_kinetics(x0, REF, t_end=200.0, dt=0.05, sample_every=100)
        assert np.max(np.abs(traj.states[:, 0] + traj.states[:, 1] - s1)) <= 1e-8
        assert np.max(np.abs(traj.states[:, 2] + traj.states[:, 3] - s3)) <= 1e-8

    def test_fourth_order_convergence(self):
        x0 = disease_free_equilibrium(REF).as_array() + np.array([-10.0, 10.0, -10.0, 10.0])
        finals = [integrate_kinetics(x0, REF, t_end=10.0, dt=dt).final for dt in (0.2, 0.1, 0.05)]
        coarse = np.max(np.abs(finals[0] - finals[1]))
        fine = np.max(np.abs(finals[1] - finals[2]))
        assert 8.0 <= coarse / fine <= 32.0

    def test_sampling_keeps_endpoints(self):
        traj = integrate_kinetics([100.0, 1.0, 100.0, 0.0], REF, t_end=1.0, dt=0.1, sample_every=4)
        assert traj.times[0] == 0.0
        assert traj.times[-1] == 1.0
        assert traj.states.shape == (len(traj.times), 4)

    def test_zero_horizon_returns_initial_state(self):
        traj = integrate_kinetics([1.0, 2.0, 3.0, 4.0], REF, t_end=0.0)
        assert len(traj.times) == 1
        np.testing.assert_array_equal(traj.final, [1.0, 2.0, 3.0, 4.0])

    def test_oversized_step_detected(self):
        x0 = disease_free_equilibrium(REF).as_array() + np.array([-10.0, 10.0, -10.0, 10.0])
        with pytest.raises(StepTooLarge):
            integrate_kinetics(x0, REF, t_end=500.0, dt=5.0)

    @pytest.mark.parametrize("kwargs", [
        {"x0": [1.0, -1.0, 1.0, 0.0], "t_end": 1.0},
        {"x0": [1.0, 1.0, 1.0], "t_end": 1.0},
        {"x0": [1.0, 1.0, 1.0, 1.0], "t_end": -1.0},
        {"x0": [1.0, 1.0, 1.0, 1.0], "t_end": 1.0, "dt": 0.0},
    ])
    def test_invalid_arguments(self, kwargs):
        with pytest.raises(ValueError):
            integrate_kinetics(p=REF, **kwargs)
