"""Shared fixtures: small deterministic panels reused across the suite."""

import numpy as np
import pytest

from epieval.scenario import EconParams, ScenarioConfig, build_panel


@pytest.fixture(scope="session")
def base_config():
    """Baseline single-date design (Table-A style parameters, short horizon)."""
    return ScenarioConfig(
        n_locations=80,
        t_total=220,
        policy_time=150,
        lambda_d=40.0,
        lambda_u=60.0,
        econ=EconParams(),
        root_seed=7,
    )


@pytest.fixture(scope="session")
def base_panel(base_config):
    return build_panel(base_config)


@pytest.fixture(scope="session")
def big_panel():
    """Larger panel for estimator tests that need stable fits."""
    config = ScenarioConfig(
        n_locations=300,
        t_total=210,
        policy_time=150,
        lambda_d=40.0,
        lambda_u=60.0,
        econ=EconParams(),
        root_seed=11,
    )
    return build_panel(config)


@pytest.fixture(scope="session")
def staggered_panel():
    config = ScenarioConfig(
        n_locations=200,
        t_total=200,
        policy_time=140,
        lambda_d=40.0,
        lambda_u=60.0,
        adoption_times=(140, 155),
        adoption_probs=(0.5, 0.5),
        econ=None,
        root_seed=3,
    )
    return build_panel(config)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
