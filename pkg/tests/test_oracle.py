"""Exhaustive branch enumeration against closed forms and the stochastic engine."""
import cmath

import numpy as np
import pytest

from sstp import (
    PhasePoint,
    SamplingScheme,
    SurfacePair,
    analytic_uncoupled,
    discretize_bath,
    enumerate_dyson,
    sigma_z_adiabatic,
)
from sstp.adiabatic import PAIRS
from sstp.engine import sample_branch_estimates
from sstp.hopping import ENERGY_CONSERVING, PRIMITIVE


def test_analytic_uncoupled_values():
    assert analytic_uncoupled(0.0, 0.5) == 1.0
    assert analytic_uncoupled(np.pi, 0.5) == pytest.approx(-1.0)
    assert analytic_uncoupled(3.0, 1.0 / 3.0) == pytest.approx(-0.4161468365, abs=1e-9)


def test_zero_steps_returns_observable_element(strong_model, rng):
    bath = discretize_bath(strong_model, n_modes=3)
    x0 = PhasePoint(R=rng.normal(size=3), P=rng.normal(size=3))
    mat = sigma_z_adiabatic(x0.R, strong_model, bath)
    for pair in PAIRS:
        out = enumerate_dyson(
            x0, pair, 0, 0.05, strong_model, bath, SamplingScheme(PRIMITIVE)
        )
        assert out.n_branches == 1
        assert out.value == pytest.approx(mat[pair.ket - 1, pair.bra - 1], abs=1e-14)


def test_step_count_guard(strong_model, rng):
    bath = discretize_bath(strong_model, n_modes=2)
    x0 = PhasePoint(R=rng.normal(size=2), P=rng.normal(size=2))
    with pytest.raises(ValueError):
        enumerate_dyson(x0, PAIRS[0], 13, 0.05, strong_model, bath, SamplingScheme(PRIMITIVE))
    with pytest.raises(ValueError):
        enumerate_dyson(x0, PAIRS[0], -1, 0.05, strong_model, bath, SamplingScheme(PRIMITIVE))


def test_uncoupled_phase_only_evolution(uncoupled_model, rng):
    bath = discretize_bath(uncoupled_model, n_modes=4)
    x0 = PhasePoint(R=rng.normal(size=4), P=rng.normal(size=4))
    n, tau = 8, 0.05
    omega = uncoupled_model.omega_tunnel
    out = enumerate_dyson(
        x0, SurfacePair(1, 2), n, tau, uncoupled_model, bath, SamplingScheme(PRIMITIVE)
    )
    assert out.n_branches == 1
    target = 1.0 * cmath.exp(-2j * omega * n * tau)  # element is 1 at zero coupling
    assert abs(out.value - target) < 1e-10


def test_branch_count_bound(strong_model, rng):
    bath = discretize_bath(strong_model, n_modes=2)
    x0 = PhasePoint(R=rng.normal(size=2), P=rng.normal(size=2))
    out = enumerate_dyson(
        x0, SurfacePair(1, 1), 5, 0.05, strong_model, bath, SamplingScheme(PRIMITIVE)
    )
    assert 1 <= out.n_branches <= 3**5


def test_infinite_threshold_equals_primitive(strong_model, rng):
    bath = discretize_bath(strong_model, n_modes=2)
    for _ in range(5):
        x0 = PhasePoint(R=rng.normal(size=2), P=rng.normal(size=2))
        pair = PAIRS[int(rng.integers(4))]
        prim = enumerate_dyson(
            x0, pair, 6, 0.05, strong_model, bath, SamplingScheme(PRIMITIVE)
        )
        loose = enumerate_dyson(
            x0, pair, 6, 0.05, strong_model, bath,
            SamplingScheme(ENERGY_CONSERVING, c_energy=np.inf),
        )
        assert prim.value == loose.value
        assert prim.n_branches == loose.n_branches


@pytest.mark.parametrize(
    "scheme",
    [SamplingScheme(PRIMITIVE), SamplingScheme(ENERGY_CONSERVING, c_energy=0.01)],
    ids=["primitive", "energy-conserving"],
)
def test_engine_mean_is_unbiased_for_branch_sum(strong_model, scheme):
    """Short Monte Carlo check of the full unbiasedness criterion."""
    bath = discretize_bath(strong_model, n_modes=2)
    rng = np.random.default_rng(4242)
    for rep in range(3):
        x0 = PhasePoint(R=rng.normal(0, 1.5, 2), P=rng.normal(0, 1.5, 2))
        pair = PAIRS[int(rng.integers(4))]
        n_steps, tau = 4, 0.05
        oracle = enumerate_dyson(x0, pair, n_steps, tau, strong_model, bath, scheme)
        est = sample_branch_estimates(
            x0, pair, 40_000, n_steps, tau, strong_model, bath, scheme,
            master_seed=100 + rep,
        )
        mu = est.mean()
        se = est.std(ddof=1) / np.sqrt(est.size)
        assert abs(mu - oracle.value.real) <= 4.0 * se + 1e-12
