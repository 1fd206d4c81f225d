"""Reduction of weighted ensembles to observable curves and diagnostics."""
import numpy as np
import pytest

from sstp import RunConfig, SamplingScheme, estimate, run_ensemble, run_trajectory
from sstp.estimator import _jackknife_stderr, estimate_trajectories
from sstp.hopping import ENERGY_CONSERVING, PRIMITIVE
from sstp.oracle import analytic_uncoupled


def test_jackknife_equals_naive_stderr_of_mean(rng):
    x = rng.normal(size=(40, 7))
    jk = _jackknife_stderr(x)
    naive = np.std(x, axis=0, ddof=1) / np.sqrt(40)
    assert np.allclose(jk, naive, rtol=1e-10)


def test_initial_mean_exact_with_pair_enumeration(strong_model):
    cfg = RunConfig(
        model=strong_model,
        scheme=SamplingScheme(ENERGY_CONSERVING),
        n_modes=8,
        tau=0.05,
        t_max=1.0,
        n_traj=32,
        record_stride=4,
        master_seed=5,
    )
    series = estimate(run_ensemble(cfg))
    assert series.mean[0] == pytest.approx(1.0, abs=1e-12)


def test_uncoupled_mean_matches_analytic(uncoupled_model):
    cfg = RunConfig(
        model=uncoupled_model,
        scheme=SamplingScheme(PRIMITIVE),
        n_modes=50,
        tau=0.01,
        t_max=30.0,
        n_traj=4,
        record_stride=100,
        master_seed=5,
    )
    series = estimate(run_ensemble(cfg))
    target = np.array(
        [analytic_uncoupled(t, uncoupled_model.omega_tunnel) for t in series.times]
    )
    assert np.max(np.abs(series.mean - target)) < 1e-3
    # all initial weights share modulus 1/2, so the spread vanishes at t = 0
    assert series.weight_var[0] == 0.0
    assert np.all(series.weight_var == 0.0)
    assert series.n_eff[0] == pytest.approx(16.0, rel=1e-12)


def test_stderr_scales_with_ensemble_size(strong_model):
    cfg = RunConfig(
        model=strong_model,
        scheme=SamplingScheme(PRIMITIVE),
        n_modes=8,
        tau=0.05,
        t_max=3.0,
        n_traj=800,
        record_stride=12,
        master_seed=99,
        enumerate_pairs=False,
    )
    ens = run_ensemble(cfg)
    full = _jackknife_stderr(ens.estimates)
    quarter = _jackknife_stderr(ens.estimates[:200])
    r = quarter[-1] / full[-1]
    assert 1.3 < r < 3.0  # about 2 with statistical slack


def test_minimum_trajectories(strong_model):
    cfg = RunConfig(
        model=strong_model,
        scheme=SamplingScheme(PRIMITIVE),
        n_modes=4,
        tau=0.05,
        t_max=0.5,
        n_traj=1,
        record_stride=10,
    )
    with pytest.raises(ValueError):
        estimate(run_ensemble(cfg))


def test_truncation_excludes_flagged(strong_model):
    cfg = RunConfig(
        model=strong_model,
        scheme=SamplingScheme(PRIMITIVE),
        n_modes=8,
        tau=0.05,
        t_max=2.0,
        n_traj=16,
        record_stride=5,
        master_seed=2,
        weight_cap=1e-3,  # everything trips the cap
    )
    ens = run_ensemble(cfg)
    with pytest.raises(ValueError):
        estimate(ens, truncate_flagged=True)
    series = estimate(ens, truncate_flagged=False)
    assert series.n_excluded == 0
    assert series.n_traj == 16


def test_estimate_trajectories_matches_ensemble(strong_model):
    cfg = RunConfig(
        model=strong_model,
        scheme=SamplingScheme(ENERGY_CONSERVING),
        n_modes=8,
        tau=0.05,
        t_max=2.0,
        n_traj=6,
        record_stride=5,
        master_seed=7,
    )
    trajs = [run_trajectory(cfg, t) for t in range(6)]
    direct = estimate_trajectories(trajs)
    recontracted = estimate_trajectories(
        trajs, model=strong_model, bath=cfg.build_bath()
    )
    ens = estimate(run_ensemble(cfg))
    assert np.allclose(direct.mean, ens.mean, atol=1e-14)
    assert np.allclose(direct.stderr, ens.stderr, atol=1e-14)
    assert np.allclose(recontracted.mean, direct.mean, atol=1e-10)
    assert np.allclose(direct.weight_var, ens.weight_var, atol=1e-14)
    assert np.allclose(direct.n_eff, ens.n_eff, atol=1e-10)
