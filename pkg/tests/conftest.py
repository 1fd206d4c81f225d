"""Shared fixtures: small model/bath combinations used across the unit tests."""
import numpy as np
import pytest

from sstp import ModelParams, discretize_bath


@pytest.fixture(scope="session")
def weak_model():
    # high-temperature, weak-coupling parameter set
    return ModelParams(omega_tunnel=1.0 / 3.0, kondo_xi=0.007, beta=0.3)


@pytest.fixture(scope="session")
def strong_model():
    # low-temperature, stronger-coupling parameter set
    return ModelParams(omega_tunnel=0.4, kondo_xi=0.09, beta=12.5)


@pytest.fixture(scope="session")
def uncoupled_model():
    return ModelParams(omega_tunnel=1.0 / 3.0, kondo_xi=0.0, beta=1.0)


@pytest.fixture(scope="session")
def small_bath(strong_model):
    return discretize_bath(strong_model, n_modes=8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
