"""
Feature matrices, sparse models, selection reports and fold plans
"""
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.utils.errors import DataError, DimensionMismatchError


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """N subjects by p named features, with an optional outcome vector"""
    X: np.ndarray
    feature_names: Tuple[str, ...]
    y: Optional[np.ndarray] = None
    subject_ids: Tuple[str, ...] = ()
    groups: Tuple[str, ...] = ()
    standardized: bool = False

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise DataError(f"Feature matrix must be 2D, got shape {X.shape}")
        n, p = X.shape
        if n < 2 or p < 1:
            raise DataError(f"Feature matrix needs N >= 2 and p >= 1, got {n}x{p}")
        if not np.all(np.isfinite(X)):
            raise DataError("Feature matrix holds non-finite values")
        names = tuple(self.feature_names)
        if len(names) != p:
            raise DimensionMismatchError((len(names),), (p,), what="feature names")
        if self.y is not None:
            y = np.asarray(self.y, dtype=float).reshape(-1)
            if y.size != n:
                raise DimensionMismatchError((y.size,), (n,), what="outcome length")
            if not np.all(np.isfinite(y)):
                raise DataError("Outcome vector holds non-finite values")
            object.__setattr__(self, "y", y)
        if self.subject_ids and len(self.subject_ids) != n:
            raise DimensionMismatchError((len(self.subject_ids),), (n,), what="subject ids")
        if self.groups and len(self.groups) != p:
            raise DimensionMismatchError((len(self.groups),), (p,), what="feature groups")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids))
        object.__setattr__(self, "groups", tuple(self.groups))

    @property
    def n_subjects(self) -> int:
        return int(self.X.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.X.shape[1])

    def rows(self, indices: Sequence[int]) -> "FeatureMatrix":
        indices = list(indices)
        return replace(
            self,
            X=self.X[indices],
            y=self.y[indices] if self.y is not None else None,
            subject_ids=tuple(self.subject_ids[i] for i in indices) if self.subject_ids else (),
        )

    def group_indices(self, *groups: str) -> List[int]:
        return [i for i, g in enumerate(self.groups) if g in groups]


@dataclass(frozen=True, eq=False)
class LassoModel:
    """Solution of ||y - X beta - b||^2 + lambda ||beta||_1"""
    beta: np.ndarray
    lambda_: float
    intercept: float
    n_iter: int = 0
    converged: bool = True
    gap: float = 0.0
    objective_history: Tuple[float, ...] = ()

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta != 0)


@dataclass(frozen=True, eq=False)
class L1LogisticModel:
    """Solution of mean logistic loss + lambda ||w||_1 with an unpenalized intercept v"""
    w: np.ndarray
    v: float
    lambda_: float
    n_iter: int = 0
    converged: bool = True
    saturated: bool = False
    objective_history: Tuple[float, ...] = ()

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(np.abs(self.w) > 1e-9)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.w + self.v


@dataclass(frozen=True, eq=False)
class SelectionReport:
    """One selection stage: candidate columns, their frequencies and the kept columns"""
    stage: int
    candidates: np.ndarray
    frequencies: np.ndarray
    selected: np.ndarray

    def __post_init__(self):
        if self.stage not in (1, 2):
            raise DataError(f"Selection stage must be 1 or 2, got {self.stage}")
        if np.any(self.frequencies < 0) or np.any(self.frequencies > 1):
            raise DataError("Selection frequencies must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class TwoStageReport:
    """Both stages of the 30 -> 20 selection and the names of the final columns"""
    stage1: SelectionReport
    stage2: SelectionReport
    feature_names: Tuple[str, ...]
    method: str
    seed: int
    params: dict = field(default_factory=dict)

    @property
    def selected(self) -> np.ndarray:
        return self.stage2.selected

    @property
    def selected_names(self) -> List[str]:
        return [self.feature_names[i] for i in self.stage2.selected]


@dataclass(frozen=True)
class FoldPlan:
    """k disjoint folds covering every subject index"""
    folds: Tuple[Tuple[int, ...], ...]
    seed: int
    stratified: bool

    @property
    def k(self) -> int:
        return len(self.folds)

    @property
    def n_subjects(self) -> int:
        return sum(len(f) for f in self.folds)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.array(self.folds[fold], dtype=np.int64)

    def train_indices(self, fold: int) -> np.ndarray:
        held_out = set(self.folds[fold])
        return np.array(
            sorted(i for f in self.folds for i in f if i not in held_out),
            dtype=np.int64,
        )
