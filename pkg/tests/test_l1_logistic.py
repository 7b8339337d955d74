"""
Unit tests for L1-penalized logistic regression
"""
import math

import numpy as np
import pytest

from app.models.learning import FeatureMatrix
from app.services.l1_logistic import (
    INTERCEPT_CAP,
    l1_logistic_fit,
    logistic_lambda_max,
    logistic_loss_and_grad,
    null_intercept,
    predict_labels,
)
from app.utils.errors import DataError


def _problem(rng, n=60, p=5):
    X = rng.normal(size=(n, p))
    b = np.where(X[:, 0] - 0.5 * X[:, 1] + 0.3 * rng.normal(size=n) > 0, 1.0, -1.0)
    return FeatureMatrix(X=X, feature_names=tuple(f"f{j}" for j in range(p)), y=b)


def test_gradient_matches_finite_differences(rng):
    """Test the analytic gradient against central differences"""
    data = _problem(rng)
    w = rng.normal(size=data.n_features) * 0.3
    v = 0.2
    _, grad_w, grad_v = logistic_loss_and_grad(data.X, data.y, w, v)
    h = 1e-6
    for j in range(data.n_features):
        e = np.zeros_like(w)
        e[j] = h
        up = logistic_loss_and_grad(data.X, data.y, w + e, v)[0]
        down = logistic_loss_and_grad(data.X, data.y, w - e, v)[0]
        assert grad_w[j] == pytest.approx((up - down) / (2 * h), abs=1e-7)
    up = logistic_loss_and_grad(data.X, data.y, w, v + h)[0]
    down = logistic_loss_and_grad(data.X, data.y, w, v - h)[0]
    assert grad_v == pytest.approx((up - down) / (2 * h), abs=1e-7)


def test_objective_never_increases(rng):
    """Test every accepted step lowers the penalized objective"""
    data = _problem(rng)
    model = l1_logistic_fit(data, 0.01, track_objective=True)
    history = np.array(model.objective_history)
    assert len(history) >= 2
    assert np.all(np.diff(history) <= 0)
    assert model.converged


def test_large_penalty_gives_null_model(rng):
    """Test above lambda_max only the intercept log(N+/N-) remains"""
    data = _problem(rng)
    model = l1_logistic_fit(data, 1.01 * logistic_lambda_max(data))
    assert model.support.size == 0
    n_pos = int(np.count_nonzero(data.y > 0))
    assert model.v == pytest.approx(math.log(n_pos / (data.n_subjects - n_pos)), abs=1e-5)


def test_small_penalty_learns_signal(rng):
    """Test the informative feature is kept and training labels are mostly recovered"""
    data = _problem(rng)
    model = l1_logistic_fit(data, 0.02)
    assert 0 in model.support
    assert model.w[0] > 0
    assert np.mean(predict_labels(model, data.X) == data.y) >= 0.8


def test_penalty_factors_shift_selection(rng):
    """Test a heavily penalized feature drops out while the others stay"""
    data = _problem(rng)
    factors = np.ones(data.n_features)
    factors[0] = 1e3
    model = l1_logistic_fit(data, 0.02, penalty_factors=factors)
    assert 0 not in model.support
    with pytest.raises(DataError):
        l1_logistic_fit(data, 0.02, penalty_factors=np.zeros(data.n_features))


def test_single_class_saturates(rng):
    """Test all-positive labels give a capped intercept and no features"""
    X = rng.normal(size=(5, 2))
    model = l1_logistic_fit(FeatureMatrix(X=X, feature_names=("a", "b"), y=np.ones(5)), 0.1)
    assert model.saturated
    assert model.v == INTERCEPT_CAP
    assert model.support.size == 0
    assert null_intercept(-np.ones(3)) == -INTERCEPT_CAP


def test_labels_must_be_signs(rng):
    X = rng.normal(size=(4, 2))
    with pytest.raises(DataError):
        l1_logistic_fit(FeatureMatrix(X=X, feature_names=("a", "b"), y=np.array([0, 1, 0, 1])), 0.1)
