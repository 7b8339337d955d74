"""
Unit tests for the coordinate-descent LASSO
"""
import numpy as np
import pytest

from app.models.learning import FeatureMatrix
from app.services.lasso import lambda_max, lasso_fit, lasso_objective, lasso_path
from app.utils.errors import DataError


def _problem(rng, n=40, p=6, noise=0.1):
    X = rng.normal(size=(n, p))
    beta = np.zeros(p)
    beta[:2] = (3.0, -2.0)
    y = X @ beta + 1.5 + noise * rng.normal(size=n)
    return FeatureMatrix(X=X, feature_names=tuple(f"f{j}" for j in range(p)), y=y)


def test_orthonormal_design_matches_soft_threshold(rng):
    """Test with orthonormal centered columns beta_j = S(x_j.y, lambda / 2)"""
    A = rng.normal(size=(20, 4))
    Q, _ = np.linalg.qr(A - A.mean(axis=0))
    y = rng.normal(size=20)
    data = FeatureMatrix(X=Q, feature_names=("a", "b", "c", "d"), y=y)
    lam = 0.8
    xty = Q.T @ (y - y.mean())
    expected = np.sign(xty) * np.maximum(np.abs(xty) - lam / 2, 0.0)
    np.testing.assert_allclose(lasso_fit(data, lam).beta, expected, atol=1e-7)


def test_zero_penalty_is_least_squares(rng):
    """Test lambda = 0 reproduces ordinary least squares with intercept"""
    data = _problem(rng)
    model = lasso_fit(data, 0.0, tol=1e-12)
    design = np.column_stack([data.X, np.ones(data.n_subjects)])
    solution, *_ = np.linalg.lstsq(design, data.y, rcond=None)
    np.testing.assert_allclose(model.beta, solution[:-1], atol=1e-6)
    assert model.intercept == pytest.approx(solution[-1], abs=1e-6)


def test_optimality_conditions(rng):
    """Test the subgradient conditions hold at the returned solution"""
    data = _problem(rng, noise=1.0)
    lam = 0.3 * lambda_max(data)
    model = lasso_fit(data, lam, tol=1e-10)
    Xc = data.X - data.X.mean(axis=0)
    residual = (data.y - data.y.mean()) - Xc @ model.beta
    correlation = 2.0 * Xc.T @ residual
    active = model.beta != 0
    assert active.any() and not active.all()
    np.testing.assert_allclose(correlation[active], lam * np.sign(model.beta[active]), atol=1e-5)
    assert np.all(np.abs(correlation[~active]) <= lam + 1e-5)


def test_lambda_max_gives_empty_support(rng):
    """Test the support is empty at lambda_max and not just below it"""
    data = _problem(rng)
    top = lambda_max(data)
    assert lasso_fit(data, top).support.size == 0
    assert lasso_fit(data, 0.9 * top).support.size > 0


def test_objective_never_increases(rng):
    """Test the per-sweep objective history is non-increasing"""
    data = _problem(rng, noise=1.0)
    model = lasso_fit(data, 0.1 * lambda_max(data), track_objective=True)
    history = np.array(model.objective_history)
    assert len(history) >= 2
    assert np.all(np.diff(history) <= 1e-9 * history[0])
    Xc = data.X - data.X.mean(axis=0)
    yc = data.y - data.y.mean()
    assert history[-1] == pytest.approx(lasso_objective(Xc, yc, model.beta, 0.0, model.lambda_))


def test_path_order_and_monotone_support(rng):
    """Test path models come back in grid order and supports grow as lambda falls"""
    data = _problem(rng)
    top = lambda_max(data)
    grid = [0.1 * top, top, 0.5 * top]
    models = lasso_path(data, grid)
    assert [m.lambda_ for m in models] == grid
    assert models[1].support.size == 0
    assert models[0].support.size >= models[2].support.size


def test_bad_inputs(rng):
    """Test a negative penalty and a missing outcome are refused"""
    data = _problem(rng)
    with pytest.raises(DataError):
        lasso_fit(data, -1.0)
    with pytest.raises(DataError):
        lasso_fit(FeatureMatrix(X=data.X, feature_names=data.feature_names), 1.0)
