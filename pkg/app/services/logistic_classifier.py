"""
Multinomial logistic regression with a small L2 penalty
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from app.models.classifiers import LogisticClassifier
from app.utils.errors import ConvergenceError, DataError, DimensionMismatchError

logger = logging.getLogger(__name__)

GRADIENT_TOL = 1e-6


def one_hot(labels: np.ndarray, n_classes: Optional[int] = None) -> np.ndarray:
    """N x K indicator matrix; classes must be 0..K-1 with K >= 2"""
    labels = np.asarray(labels, dtype=np.int64)
    k = int(n_classes) if n_classes is not None else int(labels.max()) + 1
    if k < 2:
        raise DataError(f"Classification needs at least 2 classes, got {k}")
    if labels.min() < 0 or labels.max() >= k:
        raise DataError(f"Class labels must lie in 0..{k - 1}")
    targets = np.zeros((labels.size, k))
    targets[np.arange(labels.size), labels] = 1.0
    return targets


def _unpack(params: np.ndarray, n_features: int, n_classes: int) -> Tuple[np.ndarray, np.ndarray]:
    weights = params[: n_features * n_classes].reshape(n_features, n_classes)
    return weights, params[n_features * n_classes:]


def logistic_objective(params: np.ndarray, X: np.ndarray, targets: np.ndarray, l2: float) -> Tuple[float, np.ndarray]:
    """Mean cross-entropy plus (l2 / 2) ||W||^2, with its gradient over [W.ravel(), b]"""
    n, d = X.shape
    k = targets.shape[1]
    weights, intercepts = _unpack(params, d, k)
    scores = X @ weights + intercepts
    log_norm = logsumexp(scores, axis=1)
    loss = float(np.mean(log_norm - np.sum(targets * scores, axis=1)) + 0.5 * l2 * np.sum(weights ** 2))
    residual = (np.exp(scores - log_norm[:, None]) - targets) / n
    grad_w = X.T @ residual + l2 * weights
    grad_b = residual.sum(axis=0)
    return loss, np.concatenate([grad_w.ravel(), grad_b])


def train_logistic(
    X: np.ndarray,
    labels: np.ndarray,
    l2: float = 1e-4,
    n_classes: Optional[int] = None,
    max_iter: int = 10_000,
    strict: bool = False,
) -> LogisticClassifier:
    """Fit the softmax model by L-BFGS until the projected gradient drops below 1e-6"""
    X = np.asarray(X, dtype=float)
    targets = one_hot(labels, n_classes)
    if X.shape[0] != targets.shape[0]:
        raise DimensionMismatchError((X.shape[0],), (targets.shape[0],), what="row count")
    d, k = X.shape[1], targets.shape[1]

    result = minimize(
        logistic_objective,
        np.zeros(d * k + k),
        args=(X, targets, l2),
        jac=True,
        method="L-BFGS-B",
        options={"gtol": GRADIENT_TOL, "maxiter": max_iter},
    )
    if not np.all(np.isfinite(result.x)):
        raise ConvergenceError("Logistic regression diverged")
    if not result.success:
        message = f"Logistic regression stopped without converging: {result.message}"
        if strict:
            raise ConvergenceError(message)
        logger.warning(message)

    weights, intercepts = _unpack(result.x, d, k)
    return LogisticClassifier(
        weights=weights.copy(),
        intercepts=intercepts.copy(),
        converged=bool(result.success),
        n_iter=int(result.nit),
    )


def predict_logistic_proba(model: LogisticClassifier, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise DimensionMismatchError((X.shape[1],), (model.n_features,), what="feature count")
    return softmax(X @ model.weights + model.intercepts, axis=1)
