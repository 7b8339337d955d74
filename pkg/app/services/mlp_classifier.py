"""
One-hidden-layer perceptron (10 tanh units, softmax output) trained by
full-batch gradient descent with momentum
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from app.models.classifiers import MlpClassifier
from app.services.logistic_classifier import one_hot
from app.utils.errors import ConvergenceError, DimensionMismatchError

logger = logging.getLogger(__name__)

HIDDEN_UNITS = 10


@dataclass
class MlpParams:
    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    output_weights: np.ndarray
    output_biases: np.ndarray

    def as_tuple(self):
        return self.hidden_weights, self.hidden_biases, self.output_weights, self.output_biases


def init_params(n_features: int, n_classes: int, seed: int) -> MlpParams:
    """Glorot-uniform weights, zero biases"""
    rng = np.random.default_rng(seed)
    bound_hidden = math.sqrt(6.0 / (n_features + HIDDEN_UNITS))
    bound_output = math.sqrt(6.0 / (HIDDEN_UNITS + n_classes))
    return MlpParams(
        hidden_weights=rng.uniform(-bound_hidden, bound_hidden, size=(n_features, HIDDEN_UNITS)),
        hidden_biases=np.zeros(HIDDEN_UNITS),
        output_weights=rng.uniform(-bound_output, bound_output, size=(HIDDEN_UNITS, n_classes)),
        output_biases=np.zeros(n_classes),
    )


def mlp_loss_and_grads(params: MlpParams, X: np.ndarray, targets: np.ndarray, l2: float = 0.0) -> Tuple[float, MlpParams]:
    """Mean cross-entropy plus (l2 / 2) times the squared weight norms, and its backpropagated gradient"""
    w1, b1, w2, b2 = params.as_tuple()
    n = X.shape[0]
    hidden = np.tanh(X @ w1 + b1)
    scores = hidden @ w2 + b2
    log_norm = logsumexp(scores, axis=1)
    loss = float(np.mean(log_norm - np.sum(targets * scores, axis=1)))
    loss += 0.5 * l2 * float(np.sum(w1 ** 2) + np.sum(w2 ** 2))

    delta_out = (np.exp(scores - log_norm[:, None]) - targets) / n
    grad_w2 = hidden.T @ delta_out + l2 * w2
    grad_b2 = delta_out.sum(axis=0)
    delta_hidden = (delta_out @ w2.T) * (1.0 - hidden ** 2)
    grad_w1 = X.T @ delta_hidden + l2 * w1
    grad_b1 = delta_hidden.sum(axis=0)
    return loss, MlpParams(grad_w1, grad_b1, grad_w2, grad_b2)


def train_mlp(
    X: np.ndarray,
    labels: np.ndarray,
    seed: int,
    epochs: int = 2000,
    learning_rate: float = 0.1,
    momentum: float = 0.9,
    l2: float = 1e-4,
    n_classes: Optional[int] = None,
) -> MlpClassifier:
    """Full-batch training; the same seed always yields the same weights"""
    X = np.asarray(X, dtype=float)
    targets = one_hot(labels, n_classes)
    if X.shape[0] != targets.shape[0]:
        raise DimensionMismatchError((X.shape[0],), (targets.shape[0],), what="row count")

    params = init_params(X.shape[1], targets.shape[1], seed)
    velocity = [np.zeros_like(p) for p in params.as_tuple()]
    loss = math.inf
    for epoch in range(epochs):
        loss, grads = mlp_loss_and_grads(params, X, targets, l2)
        if not math.isfinite(loss):
            raise ConvergenceError(f"MLP diverged at epoch {epoch} (loss {loss})")
        values = params.as_tuple()
        for v, p, g in zip(velocity, values, grads.as_tuple()):
            v *= momentum
            v -= learning_rate * g
            p += v

    loss, _ = mlp_loss_and_grads(params, X, targets, l2)
    if not math.isfinite(loss):
        raise ConvergenceError(f"MLP diverged after {epochs} epochs (loss {loss})")
    logger.debug(f"MLP trained for {epochs} epochs, final loss {loss:.4g}")
    return MlpClassifier(
        hidden_weights=params.hidden_weights,
        hidden_biases=params.hidden_biases,
        output_weights=params.output_weights,
        output_biases=params.output_biases,
        final_loss=float(loss),
    )


def predict_mlp_proba(model: MlpClassifier, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise DimensionMismatchError((X.shape[1],), (model.n_features,), what="feature count")
    hidden = np.tanh(X @ model.hidden_weights + model.hidden_biases)
    return softmax(hidden @ model.output_weights + model.output_biases, axis=1)
