"""
LASSO by cyclic coordinate descent on the Gram matrix
"""
import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from numba import njit

from app.models.learning import FeatureMatrix, LassoModel
from app.utils.errors import ConvergenceError, DataError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000


@njit
def _soft_threshold(value, threshold):
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


@njit
def _cd_sweeps(gram, xty, beta, gram_beta, half_lambda, max_sweeps, tol):
    """Run up to max_sweeps full sweeps in place; returns (sweeps run, last max coefficient change)"""
    p = beta.shape[0]
    max_delta = 0.0
    sweeps = 0
    while sweeps < max_sweeps:
        max_delta = 0.0
        for j in range(p):
            g_jj = gram[j, j]
            if g_jj <= 0.0:
                continue
            old = beta[j]
            rho = xty[j] - gram_beta[j] + g_jj * old
            new = _soft_threshold(rho, half_lambda) / g_jj
            delta = new - old
            if delta != 0.0:
                beta[j] = new
                for k in range(p):
                    gram_beta[k] += gram[k, j] * delta
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        sweeps += 1
        if max_delta < tol:
            break
    return sweeps, max_delta


def _centered(data: FeatureMatrix):
    if data.y is None:
        raise DataError("LASSO needs an outcome vector")
    x_mean = data.X.mean(axis=0)
    y_mean = float(data.y.mean())
    return data.X - x_mean, data.y - y_mean, x_mean, y_mean


def lasso_objective(X: np.ndarray, y: np.ndarray, beta: np.ndarray, intercept: float, lambda_: float) -> float:
    residual = y - X @ beta - intercept
    return float(residual @ residual + lambda_ * np.abs(beta).sum())


def lambda_max(data: FeatureMatrix) -> float:
    """Smallest penalty for which the all-zero coefficient vector is optimal"""
    Xc, yc, _, _ = _centered(data)
    return float(2.0 * np.max(np.abs(Xc.T @ yc)))


def lasso_fit(
    data: FeatureMatrix,
    lambda_: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    beta0: Optional[np.ndarray] = None,
    track_objective: bool = False,
    strict: bool = False,
) -> LassoModel:
    """
    Minimize ||y - X beta - b||^2 + lambda * sum |beta_j| with b unpenalized.

    Columns are centered but not scaled here; callers standardize first.
    Convergence is declared when no coefficient moves by tol or more during
    a sweep.
    """
    if not math.isfinite(lambda_) or lambda_ < 0:
        raise DataError(f"LASSO penalty must be finite and >= 0, got {lambda_}")
    Xc, yc, x_mean, y_mean = _centered(data)
    gram = np.ascontiguousarray(Xc.T @ Xc)
    xty = Xc.T @ yc
    beta = np.zeros(data.n_features) if beta0 is None else np.array(beta0, dtype=float)
    gram_beta = gram @ beta
    half_lambda = lambda_ / 2.0

    history: List[float] = []
    if track_objective:
        history.append(lasso_objective(Xc, yc, beta, 0.0, lambda_))
        n_iter, gap = 0, math.inf
        while n_iter < max_iter:
            _, gap = _cd_sweeps(gram, xty, beta, gram_beta, half_lambda, 1, tol)
            n_iter += 1
            history.append(lasso_objective(Xc, yc, beta, 0.0, lambda_))
            if gap < tol:
                break
    else:
        n_iter, gap = _cd_sweeps(gram, xty, beta, gram_beta, half_lambda, max_iter, tol)

    converged = gap < tol
    if not converged:
        message = f"LASSO did not converge in {n_iter} sweeps at lambda={lambda_:g} (last change {gap:.3e})"
        if strict:
            raise ConvergenceError(message)
        logger.warning(message)

    return LassoModel(
        beta=beta,
        lambda_=float(lambda_),
        intercept=float(y_mean - x_mean @ beta),
        n_iter=int(n_iter),
        converged=bool(converged),
        gap=float(gap),
        objective_history=tuple(history),
    )


def lasso_path(data: FeatureMatrix, lambdas: Sequence[float], **kwargs) -> List[LassoModel]:
    """Fits along a penalty grid, warm-started from the largest penalty down; returned in grid order"""
    order = np.argsort(-np.asarray(lambdas, dtype=float), kind="stable")
    models: List[Optional[LassoModel]] = [None] * len(order)
    beta = None
    for index in order:
        model = lasso_fit(data, float(lambdas[index]), beta0=beta, **kwargs)
        beta = model.beta
        models[index] = model
    return models
