"""
L1-penalized logistic regression by proximal gradient with backtracking
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

from app.models.learning import FeatureMatrix, L1LogisticModel
from app.utils.errors import ConvergenceError, DataError

logger = logging.getLogger(__name__)

INTERCEPT_CAP = 30.0
OBJECTIVE_TOL = 1e-10
PROX_GRAD_TOL = 1e-7
DEFAULT_MAX_ITER = 10_000


def _check_labels(data: FeatureMatrix) -> np.ndarray:
    if data.y is None:
        raise DataError("Logistic fit needs labels")
    b = data.y
    if not np.all(np.isin(b, (-1.0, 1.0))):
        raise DataError("Logistic labels must be -1 or +1")
    return b


def logistic_loss_and_grad(X: np.ndarray, b: np.ndarray, w: np.ndarray, v: float) -> Tuple[float, np.ndarray, float]:
    """Mean of log(1 + exp(-b (Xw + v))) with its gradient in w and v"""
    margins = b * (X @ w + v)
    loss = float(np.mean(np.logaddexp(0.0, -margins)))
    weights = -b * expit(-margins) / X.shape[0]
    return loss, X.T @ weights, float(weights.sum())


def _soft_threshold(values: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    return np.sign(values) * np.maximum(np.abs(values) - thresholds, 0.0)


def null_intercept(b: np.ndarray) -> float:
    """log(N+/N-), the optimal intercept of the model without features"""
    n_pos = int(np.count_nonzero(b > 0))
    n_neg = b.size - n_pos
    if n_pos == 0:
        return -INTERCEPT_CAP
    if n_neg == 0:
        return INTERCEPT_CAP
    return float(np.clip(math.log(n_pos / n_neg), -INTERCEPT_CAP, INTERCEPT_CAP))


def logistic_lambda_max(data: FeatureMatrix, penalty_factors: Optional[np.ndarray] = None) -> float:
    """Smallest penalty at which w = 0 is optimal"""
    b = _check_labels(data)
    _, grad_w, _ = logistic_loss_and_grad(data.X, b, np.zeros(data.n_features), null_intercept(b))
    factors = np.ones(data.n_features) if penalty_factors is None else np.asarray(penalty_factors, dtype=float)
    return float(np.max(np.abs(grad_w) / factors))


def l1_logistic_fit(
    data: FeatureMatrix,
    lambda_: float,
    penalty_factors: Optional[np.ndarray] = None,
    w0: Optional[np.ndarray] = None,
    v0: Optional[float] = None,
    max_iter: int = DEFAULT_MAX_ITER,
    track_objective: bool = False,
    strict: bool = False,
) -> L1LogisticModel:
    """
    Minimize (1/N) sum log(1 + exp(-b_i (w.x_i + v))) + lambda * sum f_j |w_j|.

    The intercept v is unpenalized and f_j are per-feature penalty factors
    (all 1 by default). Every accepted step satisfies the sufficient-decrease
    test, so the objective never increases.
    """
    if not math.isfinite(lambda_) or lambda_ < 0:
        raise DataError(f"Logistic penalty must be finite and >= 0, got {lambda_}")
    b = _check_labels(data)
    X = data.X
    p = data.n_features
    factors = np.ones(p) if penalty_factors is None else np.asarray(penalty_factors, dtype=float)
    if factors.shape != (p,) or np.any(factors <= 0):
        raise DataError("Penalty factors must be positive, one per feature")

    if np.all(b == b[0]):
        v = INTERCEPT_CAP if b[0] > 0 else -INTERCEPT_CAP
        logger.warning(f"All {b.size} labels equal {int(b[0]):+d}; intercept saturated at {v:+.0f}")
        return L1LogisticModel(w=np.zeros(p), v=v, lambda_=float(lambda_), saturated=True)

    thresholds = lambda_ * factors
    w = np.zeros(p) if w0 is None else np.array(w0, dtype=float)
    v = null_intercept(b) if v0 is None else float(v0)

    loss, grad_w, grad_v = logistic_loss_and_grad(X, b, w, v)
    current = loss + float(thresholds @ np.abs(w))
    history = [current] if track_objective else []
    # 1/L for the smooth part, L <= (||X||_2^2 + N) / (4N)
    step = 4.0 * X.shape[0] / (np.linalg.norm(X, 2) ** 2 + X.shape[0])

    converged = False
    n_iter = 0
    while n_iter < max_iter:
        n_iter += 1
        while True:
            w_new = _soft_threshold(w - step * grad_w, step * thresholds)
            v_new = v - step * grad_v
            dw = w_new - w
            dv = v_new - v
            loss_new, grad_w_new, grad_v_new = logistic_loss_and_grad(X, b, w_new, v_new)
            bound = loss + grad_w @ dw + grad_v * dv + (dw @ dw + dv * dv) / (2.0 * step)
            if loss_new <= bound + 1e-15 or step < 1e-20:
                break
            step *= 0.5

        proposed = loss_new + float(thresholds @ np.abs(w_new))
        if proposed > current:
            # rounding only; the bound above guarantees descent otherwise
            converged = True
            break
        prox_grad_norm = math.sqrt(dw @ dw + dv * dv) / step
        decrease = current - proposed
        w, v, current = w_new, v_new, proposed
        loss, grad_w, grad_v = loss_new, grad_w_new, grad_v_new
        if track_objective:
            history.append(current)
        if decrease < OBJECTIVE_TOL or prox_grad_norm < PROX_GRAD_TOL:
            converged = True
            break
        step *= 1.25

    if not converged:
        message = f"L1 logistic fit did not converge in {n_iter} iterations at lambda={lambda_:g}"
        if strict:
            raise ConvergenceError(message)
        logger.warning(message)

    saturated = abs(v) >= INTERCEPT_CAP
    if saturated:
        v = float(np.clip(v, -INTERCEPT_CAP, INTERCEPT_CAP))
        logger.warning(f"Intercept saturated at {v:+.0f}")

    return L1LogisticModel(
        w=w,
        v=float(v),
        lambda_=float(lambda_),
        n_iter=n_iter,
        converged=converged,
        saturated=saturated,
        objective_history=tuple(history),
    )


def predict_labels(model: L1LogisticModel, X: np.ndarray) -> np.ndarray:
    """Sign of the decision function as -1 / +1"""
    return np.where(model.decision_function(X) >= 0, 1.0, -1.0)
