"""
One-vs-rest nu-SVC on the sigmoid kernel, solved by SMO-style pair updates,
with per-class Platt calibration
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, softmax
from sklearn.metrics.pairwise import sigmoid_kernel

from app.models.classifiers import BinaryNuSvm, NuSvmClassifier
from app.utils.errors import DataError, DimensionMismatchError, InfeasibleNuError

logger = logging.getLogger(__name__)

KKT_TOL = 1e-3
CURVATURE_FLOOR = 1e-12
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True, eq=False)
class NuSvcSolution:
    """Dual solution with alpha in [0, 1/N], sum over each class = nu / 2"""
    alpha: np.ndarray
    gradient: np.ndarray
    rho: float
    r: float
    n_iter: int
    converged: bool


def nu_upper_bound(y: np.ndarray) -> float:
    """Largest feasible nu for the class balance: 2 min(N+, N-) / N"""
    n_pos = int(np.count_nonzero(y > 0))
    return 2.0 * min(n_pos, y.size - n_pos) / y.size


def kkt_violation(alpha: np.ndarray, gradient: np.ndarray, y: np.ndarray, upper: float) -> float:
    """Largest within-class gap between a decreasable and an increasable gradient entry"""
    worst = 0.0
    for s in (1.0, -1.0):
        members = y == s
        up = members & (alpha < upper)
        down = members & (alpha > 0)
        if up.any() and down.any():
            worst = max(worst, float(gradient[down].max() - gradient[up].min()))
    return worst


def _initial_alpha(y: np.ndarray, nu: float, upper: float) -> np.ndarray:
    """Fill each class in index order up to nu / 2"""
    alpha = np.zeros(y.size)
    for s in (1.0, -1.0):
        remaining = nu / 2.0
        for i in np.flatnonzero(y == s):
            if remaining <= 0:
                break
            alpha[i] = min(upper, remaining)
            remaining -= alpha[i]
    return alpha


def _select_pair(alpha, gradient, y, upper) -> Tuple[float, int, int]:
    """Most violating same-class pair (a increases, b decreases); ties go to the smaller index"""
    best = (0.0, -1, -1)
    for s in (1.0, -1.0):
        members = y == s
        up = np.flatnonzero(members & (alpha < upper))
        down = np.flatnonzero(members & (alpha > 0))
        if up.size == 0 or down.size == 0:
            continue
        a = int(up[np.argmin(gradient[up])])
        b = int(down[np.argmax(gradient[down])])
        gap = float(gradient[b] - gradient[a])
        if gap > best[0] or (gap == best[0] and best[1] >= 0 and min(a, b) < min(best[1], best[2])):
            best = (gap, a, b)
    return best


def _offsets(alpha, gradient, y, upper) -> Tuple[float, float]:
    """rho and r from the gradients of free variables, or the bound midpoint when none is free"""
    levels = []
    for s in (1.0, -1.0):
        members = y == s
        free = members & (alpha > 0) & (alpha < upper)
        if free.any():
            levels.append(float(gradient[free].mean()))
            continue
        at_upper = members & (alpha >= upper)
        at_lower = members & (alpha <= 0)
        lb = float(gradient[at_upper].max()) if at_upper.any() else -math.inf
        ub = float(gradient[at_lower].min()) if at_lower.any() else math.inf
        if not math.isfinite(lb):
            lb = ub
        if not math.isfinite(ub):
            ub = lb
        levels.append((ub + lb) / 2.0)
    r1, r2 = levels
    return (r1 - r2) / 2.0, (r1 + r2) / 2.0


def solve_nu_svc(
    kernel: np.ndarray,
    y: np.ndarray,
    nu: float,
    tol: float = KKT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> NuSvcSolution:
    """
    Minimize 1/2 a'Qa with Q_ij = y_i y_j K_ij, 0 <= a_i <= 1/N and
    sum_{y=+1} a = sum_{y=-1} a = nu / 2.

    Each step moves mass between two variables of the same class, which keeps
    both equality constraints. Negative curvature of an indefinite kernel is
    clamped to a small positive floor.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    upper = 1.0 / n
    bound = nu_upper_bound(y)
    if not 0 < nu <= 1:
        raise DataError(f"nu must lie in (0, 1], got {nu}")
    if nu > bound + 1e-12:
        raise InfeasibleNuError(nu, bound)
    if not np.all(np.isfinite(kernel)):
        raise DataError("Kernel matrix holds non-finite values")

    alpha = _initial_alpha(y, nu, upper)
    yk = y[:, None] * kernel * y[None, :]
    gradient = yk @ alpha
    diagonal = np.diag(kernel)
    clamped = 0

    n_iter = 0
    converged = False
    while n_iter < max_iter:
        gap, a, b = _select_pair(alpha, gradient, y, upper)
        if gap < tol:
            converged = True
            break
        n_iter += 1
        curvature = diagonal[a] + diagonal[b] - 2.0 * kernel[a, b]
        if curvature < CURVATURE_FLOOR:
            curvature = CURVATURE_FLOOR
            clamped += 1
        step = gap / curvature
        room_a = upper - alpha[a]
        room_b = alpha[b]
        if step >= room_a and room_a <= room_b:
            step = room_a
            alpha[a] = upper
            alpha[b] -= step
        elif step >= room_b:
            step = room_b
            alpha[a] += step
            alpha[b] = 0.0
        else:
            alpha[a] += step
            alpha[b] -= step
        gradient += step * (yk[:, a] - yk[:, b])

    if clamped:
        logger.warning(f"Clamped non-positive kernel curvature in {clamped} SMO steps")
    if not converged:
        logger.warning(f"nu-SVC stopped after {n_iter} iterations (KKT gap {gap:.3e})")

    rho, r = _offsets(alpha, gradient, y, upper)
    return NuSvcSolution(alpha=alpha, gradient=gradient, rho=rho, r=r, n_iter=n_iter, converged=converged)


def fit_platt(decision_values: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """Fit P(y=+1 | f) = 1 / (1 + exp(a f + b)) with Platt's smoothed targets"""
    f = np.asarray(decision_values, dtype=float)
    n_pos = int(np.count_nonzero(y > 0))
    n_neg = y.size - n_pos
    targets = np.where(y > 0, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    def objective(params):
        z = params[0] * f + params[1]
        loss = float(np.sum(targets * np.logaddexp(0.0, z) + (1.0 - targets) * np.logaddexp(0.0, -z)))
        residual = expit(z) - (1.0 - targets)
        return loss, np.array([residual @ f, residual.sum()])

    start = np.array([0.0, math.log((n_neg + 1.0) / (n_pos + 1.0))])
    result = minimize(objective, start, jac=True, method="BFGS")
    return float(result.x[0]), float(result.x[1])


def _kernel(model: NuSvmClassifier, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return sigmoid_kernel(A, B, gamma=model.gamma, coef0=model.coef0)


def train_nusvm(
    X: np.ndarray,
    labels: np.ndarray,
    nu: float = 0.3,
    gamma: Optional[float] = None,
    coef0: float = 0.0,
    n_classes: Optional[int] = None,
) -> NuSvmClassifier:
    """One nu-SVC per class against the rest, each calibrated with Platt scaling"""
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    if X.shape[0] != labels.size:
        raise DimensionMismatchError((X.shape[0],), (labels.size,), what="row count")
    k = int(n_classes) if n_classes is not None else int(labels.max()) + 1
    if k < 2:
        raise DataError(f"Classification needs at least 2 classes, got {k}")
    gamma = 1.0 / X.shape[1] if gamma is None else float(gamma)
    kernel = sigmoid_kernel(X, gamma=gamma, coef0=coef0)
    if not np.all(np.isfinite(kernel)):
        raise DataError("Kernel matrix holds non-finite values")

    machines = []
    for c in range(k):
        y = np.where(labels == c, 1.0, -1.0)
        bound = nu_upper_bound(y)
        if nu > bound + 1e-12:
            raise InfeasibleNuError(nu, bound, class_name=str(c))
        solution = solve_nu_svc(kernel, y, nu)
        r = solution.r
        if r <= 1e-12:
            logger.warning(f"Class {c}: non-positive margin scale r={r:.3e}; decision values left unscaled")
            r = 1.0
        support = np.flatnonzero(solution.alpha > 0)
        coef = solution.alpha[support] * y[support] / r
        rho = solution.rho / r
        decision = kernel[:, support] @ coef - rho
        platt_a, platt_b = fit_platt(decision, y)
        machines.append(BinaryNuSvm(
            support_vectors=X[support].copy(),
            dual_coef=coef,
            rho=rho,
            platt_a=platt_a,
            platt_b=platt_b,
            n_iter=solution.n_iter,
            converged=solution.converged,
        ))
        logger.debug(f"Class {c}: {support.size} support vectors, {solution.n_iter} SMO steps")

    return NuSvmClassifier(machines=tuple(machines), nu=float(nu), gamma=gamma, coef0=float(coef0), n_features=X.shape[1])


def nusvm_decision_function(model: NuSvmClassifier, X: np.ndarray) -> np.ndarray:
    """N x K matrix of one-vs-rest decision values"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise DimensionMismatchError((X.shape[1],), (model.n_features,), what="feature count")
    columns = [_kernel(model, X, m.support_vectors) @ m.dual_coef - m.rho for m in model.machines]
    return np.column_stack(columns)


def predict_nusvm_proba(model: NuSvmClassifier, X: np.ndarray) -> np.ndarray:
    """Platt probabilities per class, renormalized to sum to 1"""
    decision = nusvm_decision_function(model, X)
    a = np.array([m.platt_a for m in model.machines])
    b = np.array([m.platt_b for m in model.machines])
    log_p = -np.logaddexp(0.0, decision * a + b)
    return softmax(log_p, axis=1)
