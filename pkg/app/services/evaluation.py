"""
Cross-validation harness: fold plans, repeated k-fold CV with selection inside
the training folds, classifier grid search and selection-method comparison
"""
import logging
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from pydantic import ValidationError
from sklearn.model_selection import ParameterGrid

from app.models.learning import FeatureMatrix, FoldPlan
from app.schemas.pipeline import PipelineConfig, SelectionMethod
from app.schemas.reports import (
    AccuracyDrop,
    ComparisonCell,
    ComparisonReport,
    CvReport,
    FoldResult,
    GridPoint,
    GridSearchResult,
)
from app.services.ensemble import predict_ensemble, train_ensemble
from app.services.feature_selection import two_stage_select
from app.utils.errors import DataError, FoldFailedError, UsageError

logger = logging.getLogger(__name__)

NESTED = "nested selection"
NON_NESTED = "non-nested selection"


def kfold_split(n_subjects: int, labels: Optional[Sequence[int]], k: int, seed: int, stratified: bool = True) -> FoldPlan:
    """
    Partition subject indices into k folds.

    Stratified plans shuffle each class and deal its members round-robin with
    one counter running across classes, so fold sizes and per-class counts both
    differ by at most one.
    """
    if k < 2:
        raise UsageError(f"k must be >= 2, got {k}")
    if k > n_subjects:
        raise DataError(f"Cannot split {n_subjects} subjects into {k} folds")
    rng = np.random.default_rng(seed)
    folds: List[List[int]] = [[] for _ in range(k)]

    if stratified:
        if labels is None:
            raise UsageError("Stratified folds need labels")
        labels = np.asarray(labels, dtype=np.int64)
        if labels.size != n_subjects:
            raise DataError(f"{labels.size} labels for {n_subjects} subjects")
        counter = 0
        for c in np.unique(labels):
            for index in rng.permutation(np.flatnonzero(labels == c)):
                folds[counter % k].append(int(index))
                counter += 1
    else:
        for position, index in enumerate(rng.permutation(n_subjects)):
            folds[position % k].append(int(index))

    return FoldPlan(folds=tuple(tuple(sorted(f)) for f in folds), seed=seed, stratified=stratified)


def _child_seeds(seed: int, n: int) -> List[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def _run_fold(
    features: FeatureMatrix,
    labels: np.ndarray,
    config: PipelineConfig,
    train: np.ndarray,
    test: np.ndarray,
    fixed_columns: Optional[Sequence[int]],
    seed: int,
) -> Dict[str, Any]:
    if fixed_columns is None:
        report = two_stage_select(features.rows(train), labels[train], config.selection, seed=seed)
        columns = [int(c) for c in report.selected]
    else:
        columns = list(fixed_columns)

    ensemble = train_ensemble(
        features.X[np.ix_(train, columns)],
        labels[train],
        config.classifier,
        seed=seed,
        n_classes=config.n_classes,
        feature_names=[features.feature_names[c] for c in columns],
    )
    predicted, _ = predict_ensemble(ensemble, features.X[np.ix_(test, columns)])
    return {
        "predicted": predicted,
        "columns": [features.feature_names[c] for c in columns],
    }


def _guarded_fold(repeat: int, fold: int, *args) -> Dict[str, Any]:
    try:
        return _run_fold(*args)
    except Exception as e:
        logger.error(f"Fold failed (repeat {repeat}, fold {fold}): {e}")
        raise FoldFailedError(repeat, fold, e) from e


def run_cv(
    features: FeatureMatrix,
    labels: Sequence[int],
    config: PipelineConfig,
    k: Optional[int] = None,
    n_repeats: Optional[int] = None,
    seed: Optional[int] = None,
    method: Optional[SelectionMethod] = None,
    n_jobs: Optional[int] = None,
) -> CvReport:
    """
    Repeated k-fold CV of selection plus ensemble.

    In nested mode selection and training see the training folds only; with
    paper_order the selection runs once on every subject first. Every
    (repeat, fold) job has its own seed derived from the root seed, so parallel
    and serial runs agree.
    """
    k = k or config.cv.k
    n_repeats = n_repeats or config.cv.n_repeats
    seed = config.seed if seed is None else seed
    n_jobs = config.n_jobs if n_jobs is None else n_jobs
    if method is not None:
        config = config.model_copy(update={"selection": config.selection.model_copy(update={"method": SelectionMethod(method)})})
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size != features.n_subjects:
        raise DataError(f"{labels.size} labels for {features.n_subjects} subjects")
    n_classes = config.n_classes
    if labels.min() < 0 or labels.max() >= n_classes:
        raise DataError(f"Class labels must lie in 0..{n_classes - 1}")

    fixed_columns = None
    mode = NESTED
    if config.cv.paper_order:
        mode = NON_NESTED
        report = two_stage_select(features, labels, config.selection, seed=seed, n_jobs=n_jobs)
        fixed_columns = [int(c) for c in report.selected]
        logger.info(f"Selected {len(fixed_columns)} features once on all {features.n_subjects} subjects")

    jobs = []
    for repeat, repeat_seed in enumerate(_child_seeds(seed, n_repeats)):
        plan_seed, *fold_seeds = _child_seeds(repeat_seed, k + 1)
        plan = kfold_split(features.n_subjects, labels, k, plan_seed, config.cv.stratified)
        for fold in range(k):
            jobs.append((repeat, fold, plan.train_indices(fold), plan.test_indices(fold), fold_seeds[fold]))

    outputs = Parallel(n_jobs=n_jobs)(
        delayed(_guarded_fold)(repeat, fold, features, labels, config, train, test, fixed_columns, fold_seed)
        for repeat, fold, train, test, fold_seed in jobs
    )

    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    folds = []
    for (repeat, fold, _, test, _), output in zip(jobs, outputs):
        truth = labels[test]
        predicted = output["predicted"]
        np.add.at(confusion, (truth, predicted), 1)
        accuracy = float(np.mean(predicted == truth))
        folds.append(FoldResult(
            repeat=repeat,
            fold=fold,
            accuracy=accuracy,
            n_test=int(test.size),
            selected_features=output["columns"],
        ))
        logger.info(f"Repeat {repeat}, fold {fold}: accuracy {accuracy:.3f} on {test.size} subjects")

    accuracies = np.array([f.accuracy for f in folds])
    return CvReport(
        mode=mode,
        method=SelectionMethod(config.selection.method).value,
        k=k,
        n_repeats=n_repeats,
        seed=seed,
        class_names=config.resolved_class_names(),
        folds=folds,
        mean=float(accuracies.mean()),
        std=float(accuracies.std()),
        confusion=confusion.tolist(),
        config=config.model_dump(mode="json"),
    )


def best_grid_index(points: Sequence[GridPoint]) -> int:
    """Highest mean accuracy, then lowest std, then the first listed"""
    best = 0
    for i, point in enumerate(points[1:], start=1):
        leader = points[best]
        if point.mean > leader.mean or (point.mean == leader.mean and point.std < leader.std):
            best = i
    return best


def grid_search(
    features: FeatureMatrix,
    labels: Sequence[int],
    param_grid: Mapping[str, Sequence[Any]],
    config: PipelineConfig,
    k: Optional[int] = None,
    n_repeats: Optional[int] = None,
    seed: Optional[int] = None,
) -> GridSearchResult:
    """
    Run CV for every combination of parameters and keep the whole table. Keys
    name either a classifier or a selection field.
    """
    if not param_grid or any(len(values) == 0 for values in param_grid.values()):
        raise UsageError("Parameter grid is empty")
    classifier_keys = set(type(config.classifier).model_fields)
    selection_keys = set(type(config.selection).model_fields)
    unknown = sorted(set(param_grid) - classifier_keys - selection_keys)
    if unknown:
        raise UsageError(f"Unknown parameters in grid: {unknown}")

    points = []
    for params in ParameterGrid(dict(param_grid)):
        try:
            classifier = config.classifier.model_validate(
                {**config.classifier.model_dump(), **{key: v for key, v in params.items() if key in classifier_keys}}
            )
            selection = config.selection.model_validate(
                {**config.selection.model_dump(), **{key: v for key, v in params.items() if key in selection_keys}}
            )
        except ValidationError as e:
            raise UsageError(f"Invalid grid point {params}: {e}")
        point_config = config.model_copy(update={"classifier": classifier, "selection": selection})
        report = run_cv(features, labels, point_config, k, n_repeats, seed)
        points.append(GridPoint(params=dict(params), mean=report.mean, std=report.std))
        logger.info(f"Grid point {params}: {report.mean:.4f} ± {report.std:.4f}")
    best = best_grid_index(points)
    logger.info(f"Best grid point: {points[best].params}")
    return GridSearchResult(points=points, best_index=best)


def compare_selection_methods(
    tables: Mapping[str, FeatureMatrix],
    labels: Sequence[int],
    config: PipelineConfig,
    methods: Sequence[SelectionMethod] = tuple(SelectionMethod),
) -> ComparisonReport:
    """
    Cross-validated accuracy for every (segmentation source, selection method)
    pair, plus each method's accuracy drop from the first source to the others.
    """
    if not tables:
        raise UsageError("No feature tables to compare")
    sources = list(tables)
    reference = tables[sources[0]]
    for name in sources[1:]:
        if tables[name].subject_ids != reference.subject_ids:
            raise DataError(f"Feature table {name} lists different subjects than {sources[0]}")

    cells = []
    for source in sources:
        for method in methods:
            report = run_cv(tables[source], labels, config, method=method)
            cells.append(ComparisonCell(
                source=source,
                method=SelectionMethod(method).value,
                mean=report.mean,
                std=report.std,
            ))

    means = {(c.source, c.method): c.mean for c in cells}
    drops = [
        AccuracyDrop(
            source=source,
            reference=sources[0],
            method=SelectionMethod(method).value,
            drop=means[(sources[0], SelectionMethod(method).value)] - means[(source, SelectionMethod(method).value)],
        )
        for source in sources[1:]
        for method in methods
    ]
    return ComparisonReport(
        sources=sources,
        methods=[SelectionMethod(m).value for m in methods],
        cells=cells,
        drops=drops,
        config=config.model_dump(mode="json"),
    )
