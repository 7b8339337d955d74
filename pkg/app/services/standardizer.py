"""
Column standardization learned on training rows
"""
import logging
from typing import Sequence, Tuple

import numpy as np

from app.models.classifiers import Standardizer
from app.utils.errors import DataError, DimensionMismatchError, ZeroVarianceError

logger = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-12


def fit_standardizer(X: np.ndarray, feature_names: Sequence[str] = ()) -> Standardizer:
    """Column means and population standard deviations; zero-variance columns are rejected"""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DataError(f"Standardizer needs at least 2 rows, got shape {X.shape}")
    names = tuple(feature_names) or tuple(f"column_{j}" for j in range(X.shape[1]))
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    for j in np.flatnonzero(scale <= VARIANCE_FLOOR * np.maximum(1.0, np.abs(mean))):
        raise ZeroVarianceError(names[j])
    return Standardizer(mean=mean, scale=scale, feature_names=names)


def apply_standardizer(standardizer: Standardizer, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != standardizer.n_features:
        raise DimensionMismatchError((X.shape[1],), (standardizer.n_features,), what="feature count")
    return (X - standardizer.mean) / standardizer.scale


def constant_columns(X: np.ndarray) -> np.ndarray:
    """Boolean mask of columns whose spread is below the variance floor"""
    X = np.asarray(X, dtype=float)
    return X.std(axis=0) <= VARIANCE_FLOOR * np.maximum(1.0, np.abs(X.mean(axis=0)))


def standardize_lenient(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standardize columns, leaving constant columns at zero; returns (Z, mean, scale)"""
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    constant = constant_columns(X)
    if constant.any():
        logger.debug(f"{int(constant.sum())} constant columns left at zero")
    safe = np.where(constant, 1.0, scale)
    Z = (X - mean) / safe
    Z[:, constant] = 0.0
    return Z, mean, safe
