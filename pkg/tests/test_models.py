"""Small-model layer: polynomial features, scaling, OLS, logistic IRLS."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import expit

from epieval.models import (
    DegenerateDesignError,
    FeatureScaler,
    LinearFit,
    LogisticFit,
    SeparationWarning,
    polynomial_features,
    solve_least_squares,
)


def test_polynomial_features_degree2_with_interactions():
    x = np.array([[2.0, 3.0]])
    feats = polynomial_features(x, degree=2, include_interactions=True)
    # intercept, x1, x2, x1^2, x1*x2, x2^2
    assert feats.tolist() == [[1.0, 2.0, 3.0, 4.0, 6.0, 9.0]]


def test_polynomial_features_degree3_count():
    x = np.zeros((4, 2))
    feats = polynomial_features(x, degree=3, include_interactions=True)
    # C(2+3, 3) = 10 monomials including the intercept
    assert feats.shape == (4, 10)


def test_polynomial_features_no_interactions():
    x = np.array([[2.0, 3.0]])
    feats = polynomial_features(x, degree=2, include_interactions=False)
    # intercept, x1, x2, x1^2, x2^2
    assert feats.tolist() == [[1.0, 2.0, 3.0, 4.0, 9.0]]


def test_polynomial_features_deterministic_ordering():
    x = np.random.default_rng(0).normal(size=(5, 3))
    a = polynomial_features(x, degree=3)
    b = polynomial_features(x, degree=3)
    assert np.array_equal(a, b)


def test_feature_scaler_roundtrip():
    rng = np.random.default_rng(1)
    x = np.column_stack([np.ones(50), rng.normal(5.0, 2.0, 50), rng.normal(-3.0, 9.0, 50)])
    scaler = FeatureScaler.fit(x)
    z = scaler.transform(x)
    assert np.allclose(z[:, 0], 1.0)  # intercept untouched
    assert np.allclose(z[:, 1:].mean(axis=0), 0.0, atol=1e-12)
    # coefficients in scaled space map back to raw-space predictions
    beta_scaled = np.array([1.0, 2.0, -0.5])
    beta_raw = scaler.restore_coef(beta_scaled)
    assert np.allclose(x @ beta_raw, z @ beta_scaled)


def test_solve_least_squares_exact():
    rng = np.random.default_rng(2)
    x = np.column_stack([np.ones(40), rng.normal(size=(40, 2))])
    beta = np.array([1.0, -2.0, 0.5])
    y = x @ beta
    assert np.allclose(solve_least_squares(x, y), beta, atol=1e-10)


def test_solve_least_squares_rank_deficient_does_not_blow_up():
    x = np.column_stack([np.ones(30), np.arange(30.0), 2 * np.arange(30.0)])
    y = np.arange(30.0)
    beta = solve_least_squares(x, y)
    assert np.all(np.isfinite(beta))
    assert np.allclose(x @ beta, y, atol=1e-6)


@given(st.integers(min_value=0, max_value=2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_linear_fit_recovers_coefficients(seed):
    rng = np.random.default_rng(seed)
    x = np.column_stack([np.ones(200), rng.normal(10.0, 4.0, 200), rng.normal(0, 1, 200)])
    beta = rng.normal(size=3)
    y = x @ beta
    fit = LinearFit.fit(x, y)
    assert np.allclose(fit.coef, beta, atol=1e-7)
    assert np.allclose(fit.predict(x), y, atol=1e-7)


def test_linear_fit_shape_mismatch():
    with pytest.raises(DegenerateDesignError):
        LinearFit.fit(np.ones((5, 2)), np.ones(4))


def test_logistic_fit_recovers_coefficients():
    rng = np.random.default_rng(3)
    x = np.column_stack([np.ones(20000), rng.normal(size=20000)])
    beta = np.array([-0.3, 0.8])
    d = rng.random(20000) < expit(x @ beta)
    fit = LogisticFit.fit(x, d.astype(float))
    assert fit.converged
    assert np.allclose(fit.coef, beta, atol=0.08)


def test_logistic_fit_matches_probabilities():
    rng = np.random.default_rng(4)
    x = np.column_stack([np.ones(5000), rng.normal(size=5000)])
    d = (rng.random(5000) < expit(1.0 - 2.0 * x[:, 1])).astype(float)
    fit = LogisticFit.fit(x, d)
    p = fit.predict_proba(x)
    assert np.all((p > 0) & (p < 1))
    # score equations hold at the optimum: X'(d - p) = 0
    assert np.allclose(x.T @ (d - p), 0.0, atol=1e-5)


def test_logistic_fit_single_class_raises():
    x = np.column_stack([np.ones(20), np.arange(20.0)])
    with pytest.raises(DegenerateDesignError):
        LogisticFit.fit(x, np.ones(20))


def test_logistic_separation_warns_and_clips():
    x = np.column_stack([np.ones(40), np.r_[np.zeros(20), np.ones(20)]])
    d = np.r_[np.zeros(20), np.ones(20)]
    with pytest.warns(SeparationWarning):
        fit = LogisticFit.fit(x, d)
    p = fit.predict_proba(x)
    assert np.all(p >= 1e-6) and np.all(p <= 1 - 1e-6)
