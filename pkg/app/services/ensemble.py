"""
Weighted soft voting over the LR, MLP and Nu-SVM classifiers
"""
import logging
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from app.models.classifiers import (
    LogisticClassifier,
    MlpClassifier,
    NuSvmClassifier,
    TrainedEnsemble,
)
from app.schemas.pipeline import ClassifierConfig
from app.services.logistic_classifier import predict_logistic_proba, train_logistic
from app.services.mlp_classifier import predict_mlp_proba, train_mlp
from app.services.nusvm_classifier import predict_nusvm_proba, train_nusvm
from app.services.standardizer import apply_standardizer, fit_standardizer
from app.utils.errors import DataError, DimensionMismatchError

logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-6
DEFAULT_WEIGHTS = (1.0, 1.0, 2.0)

BaseModel = Union[LogisticClassifier, MlpClassifier, NuSvmClassifier]


def predict_proba(model: BaseModel, X: np.ndarray) -> np.ndarray:
    """Class distribution of any base model, one row per input row"""
    if isinstance(model, LogisticClassifier):
        return predict_logistic_proba(model, X)
    if isinstance(model, MlpClassifier):
        return predict_mlp_proba(model, X)
    if isinstance(model, NuSvmClassifier):
        return predict_nusvm_proba(model, X)
    raise DataError(f"Unsupported model type {type(model).__name__}")


def ensemble_vote(
    p_lr: Sequence[float],
    p_mlp: Sequence[float],
    p_svm: Sequence[float],
    weights: Sequence[float] = DEFAULT_WEIGHTS,
) -> Tuple[int, np.ndarray]:
    """Weighted mean of three distributions and its argmax (lowest class index on ties)"""
    members = [np.asarray(p, dtype=float) for p in (p_lr, p_mlp, p_svm)]
    if len({p.shape for p in members}) != 1 or members[0].ndim != 1:
        raise DimensionMismatchError(members[0].shape, members[-1].shape, what="distribution length")
    for p in members:
        if np.any(p < 0) or abs(p.sum() - 1.0) > NORMALIZATION_TOL:
            raise DataError(f"Vote input is not a probability distribution: {p.tolist()}")
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (3,) or np.any(weights <= 0):
        raise DataError(f"Voting weights must be three positive values, got {weights.tolist()}")

    combined = sum(w * p for w, p in zip(weights, members)) / weights.sum()
    return int(np.argmax(combined)), combined


def train_ensemble(
    X: np.ndarray,
    labels: np.ndarray,
    config: Optional[ClassifierConfig] = None,
    seed: int = 0,
    n_classes: Optional[int] = None,
    feature_names: Sequence[str] = (),
    class_names: Sequence[str] = (),
) -> TrainedEnsemble:
    """Standardize on the training rows, then fit the three base classifiers on identical features"""
    config = config or ClassifierConfig()
    labels = np.asarray(labels, dtype=np.int64)
    k = int(n_classes) if n_classes is not None else int(labels.max()) + 1
    standardizer = fit_standardizer(X, feature_names)
    Z = apply_standardizer(standardizer, X)

    lr = train_logistic(Z, labels, l2=config.lr_l2, n_classes=k)
    mlp = train_mlp(
        Z,
        labels,
        seed=seed,
        epochs=config.mlp_epochs,
        learning_rate=config.mlp_learning_rate,
        momentum=config.mlp_momentum,
        l2=config.mlp_l2,
        n_classes=k,
    )
    svm = train_nusvm(Z, labels, nu=config.svm_nu, gamma=config.svm_gamma, coef0=config.svm_coef0, n_classes=k)
    logger.debug(f"Ensemble trained on {Z.shape[0]} subjects x {Z.shape[1]} features")

    return TrainedEnsemble(
        standardizer=standardizer,
        lr=lr,
        mlp=mlp,
        svm=svm,
        weights=tuple(config.weights),
        class_names=tuple(class_names) or tuple(str(c) for c in range(k)),
        feature_names=standardizer.feature_names,
        seed=seed,
        config=config.model_dump(mode="json"),
    )


def predict_ensemble(ensemble: TrainedEnsemble, X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Predicted class indices and combined distributions for raw (unstandardized) rows"""
    Z = apply_standardizer(ensemble.standardizer, X)
    p_lr = predict_proba(ensemble.lr, Z)
    p_mlp = predict_proba(ensemble.mlp, Z)
    p_svm = predict_proba(ensemble.svm, Z)
    classes = np.empty(Z.shape[0], dtype=np.int64)
    combined = np.empty_like(p_lr)
    for i in range(Z.shape[0]):
        classes[i], combined[i] = ensemble_vote(p_lr[i], p_mlp[i], p_svm[i], ensemble.weights)
    return classes, combined
