"""
Unit tests for fold plans, repeated cross-validation, grid search and
selection-method comparison
"""
from dataclasses import replace

import numpy as np
import pytest

from app.schemas.pipeline import ClassifierConfig, CvConfig, PipelineConfig, SelectionConfig, SelectionMethod
from app.schemas.reports import GridPoint
from app.services.evaluation import (
    NESTED, NON_NESTED, best_grid_index, compare_selection_methods, grid_search,
    kfold_split, run_cv,
)
from app.utils.errors import DataError, UsageError
from tests.helpers import planted_features


@pytest.fixture
def config():
    return PipelineConfig(
        n_classes=3,
        seed=5,
        n_jobs=1,
        selection=SelectionConfig(method="lasso", n_lambdas=4, lambda_min_ratio=0.3, stage1_count=4, stage2_count=3),
        classifier=ClassifierConfig(mlp_epochs=100),
        cv=CvConfig(k=3, n_repeats=2),
    )


@pytest.fixture(scope="module")
def planted():
    return planted_features(n_per_class=8, n_classes=3, n_shape=8, n_volumetric=3, seed=6)


def test_kfold_partition():
    """Test folds are disjoint, cover every index and differ in size by at most one"""
    labels = np.array([0] * 7 + [1] * 5 + [2] * 4)
    plan = kfold_split(16, labels, 5, seed=1)
    indices = sorted(i for fold in plan.folds for i in fold)
    assert indices == list(range(16))
    sizes = [len(f) for f in plan.folds]
    assert max(sizes) - min(sizes) <= 1
    for c in range(3):
        per_fold = [int(np.sum(labels[list(f)] == c)) for f in plan.folds]
        assert max(per_fold) - min(per_fold) <= 1


def test_kfold_train_test_split():
    """Test training indices are the complement of the held-out fold"""
    plan = kfold_split(10, None, 4, seed=2, stratified=False)
    for fold in range(4):
        train, test = plan.train_indices(fold), plan.test_indices(fold)
        assert set(train).isdisjoint(test)
        assert len(train) + len(test) == 10


def test_kfold_is_seeded():
    labels = np.repeat([0, 1], 6)
    assert kfold_split(12, labels, 3, seed=4) == kfold_split(12, labels, 3, seed=4)
    assert kfold_split(12, labels, 3, seed=4) != kfold_split(12, labels, 3, seed=5)


def test_kfold_errors():
    """Test k below 2, k above N and missing labels for stratification"""
    with pytest.raises(UsageError):
        kfold_split(10, None, 1, seed=0, stratified=False)
    with pytest.raises(DataError):
        kfold_split(3, None, 4, seed=0, stratified=False)
    with pytest.raises(UsageError):
        kfold_split(10, None, 2, seed=0)


def test_run_cv_counts(planted, config):
    """Test one fold result per (repeat, fold) and a confusion matrix over every prediction"""
    table, labels = planted
    report = run_cv(table, labels, config)
    assert len(report.folds) == 6
    assert report.mode == NESTED
    assert np.sum(report.confusion) == 2 * table.n_subjects
    assert sum(f.n_test for f in report.folds) == 2 * table.n_subjects
    assert all(len(f.selected_features) == 3 for f in report.folds)
    assert 0.0 <= report.mean <= 1.0
    assert report.mean >= 0.8


def test_run_cv_is_deterministic(planted, config):
    """Test two runs with one seed report the same accuracies"""
    table, labels = planted
    first = run_cv(table, labels, config)
    second = run_cv(table, labels, config)
    np.testing.assert_array_equal(first.accuracies, second.accuracies)


def test_paper_order_selects_once(planted, config):
    """Test selection before the folds gives every fold the same columns"""
    table, labels = planted
    paper = config.model_copy(update={"cv": CvConfig(k=3, n_repeats=2, paper_order=True)})
    report = run_cv(table, labels, paper)
    assert report.mode == NON_NESTED
    assert len({tuple(f.selected_features) for f in report.folds}) == 1


def test_run_cv_label_checks(planted, config):
    table, labels = planted
    with pytest.raises(DataError):
        run_cv(table, labels[:-1], config)
    with pytest.raises(DataError):
        run_cv(table, np.full_like(labels, 7), config)


def test_best_grid_index():
    """Test highest mean wins, then lowest std, then the first listed"""
    points = [GridPoint(params={"a": 1}, mean=0.85, std=0.01), GridPoint(params={"a": 2}, mean=0.90, std=0.05)]
    assert best_grid_index(points) == 1
    points.append(GridPoint(params={"a": 3}, mean=0.90, std=0.02))
    assert best_grid_index(points) == 2
    points.append(GridPoint(params={"a": 4}, mean=0.90, std=0.02))
    assert best_grid_index(points) == 2


def test_grid_search(planted, config):
    """Test every grid point is evaluated and invalid grids are refused"""
    table, labels = planted
    result = grid_search(table, labels, {"svm_nu": [0.2, 0.3]}, config, k=3, n_repeats=1)
    assert [p.params for p in result.points] == [{"svm_nu": 0.2}, {"svm_nu": 0.3}]
    assert result.best_params in ({"svm_nu": 0.2}, {"svm_nu": 0.3})
    with pytest.raises(UsageError):
        grid_search(table, labels, {"depth": [1]}, config)
    with pytest.raises(UsageError):
        grid_search(table, labels, {"svm_nu": [2.0]}, config)
    with pytest.raises(UsageError):
        grid_search(table, labels, {}, config)


def test_grid_search_over_selection(planted, config):
    """Test selection fields are grid parameters and reach the selection step"""
    table, labels = planted
    grid = {"lambda_min_ratio": [0.3, 0.5], "svm_nu": [0.3]}
    result = grid_search(table, labels, grid, config, k=3, n_repeats=1)
    assert [p.params for p in result.points] == [
        {"lambda_min_ratio": 0.3, "svm_nu": 0.3},
        {"lambda_min_ratio": 0.5, "svm_nu": 0.3},
    ]
    baseline = run_cv(table, labels, config, k=3, n_repeats=1)
    assert result.points[0].mean == pytest.approx(baseline.mean)
    with pytest.raises(UsageError):
        grid_search(table, labels, {"lambda_min_ratio": [0.0]}, config)


def test_compare_selection_methods(planted, config):
    """Test one cell per (source, method) and drops measured from the first source"""
    table, labels = planted
    rng = np.random.default_rng(9)
    noisy = replace(table, X=table.X + rng.normal(0.0, 2.0, table.X.shape))
    methods = [SelectionMethod.LASSO, SelectionMethod.L1_LOGISTIC]
    report = compare_selection_methods({"GT": table, "predicted": noisy}, labels, config, methods=methods)
    assert report.sources == ["GT", "predicted"]
    assert report.methods == ["lasso", "l1_logistic"]
    assert len(report.cells) == 4
    assert len(report.drops) == 2
    for drop in report.drops:
        assert drop.reference == "GT"
        expected = report.cell("GT", drop.method).mean - report.cell("predicted", drop.method).mean
        assert drop.drop == pytest.approx(expected)
    assert report.cell("GT", "lasso").mean == pytest.approx(run_cv(table, labels, config).mean)


def test_compare_selection_rejects_mismatched_subjects(planted, config):
    table, labels = planted
    shuffled = replace(table, subject_ids=list(reversed(table.subject_ids)))
    with pytest.raises(DataError):
        compare_selection_methods({"GT": table, "predicted": shuffled}, labels, config, methods=[SelectionMethod.LASSO])
    with pytest.raises(UsageError):
        compare_selection_methods({}, labels, config)
