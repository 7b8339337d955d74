"""
Unit tests for stability frequencies and the two-stage selection
"""
from dataclasses import replace

import numpy as np
import pytest

from app.schemas.pipeline import SelectionConfig, SelectionMethod
from app.services.feature_selection import (
    lambda_grid,
    ovr_frequencies,
    randomized_logistic,
    rank_by_frequency,
    two_stage_select,
)
from app.models.learning import FeatureMatrix
from app.services.standardizer import standardize_lenient
from app.utils.errors import SelectionError
from tests.helpers import planted_features

FAST_LASSO = SelectionConfig(method="lasso", n_lambdas=10, lambda_min_ratio=0.3, stage1_count=8, stage2_count=5)


@pytest.fixture(scope="module")
def planted():
    table, labels = planted_features(n_per_class=10, n_classes=5, n_shape=30, n_volumetric=6, seed=4)
    X = table.X.copy()
    X[:, 5] = 2.5
    return replace(table, X=X), labels


def test_lambda_grid():
    """Test a log grid from the top value down to min_ratio times it"""
    grid = lambda_grid(10.0, 5, 1e-4)
    assert grid.size == 5
    assert grid[0] == pytest.approx(10.0)
    assert grid[-1] == pytest.approx(1e-3)
    assert np.all(np.diff(grid) < 0)
    np.testing.assert_array_equal(lambda_grid(0.0), [0.0])


def test_rank_ties_by_column_index():
    """Test descending frequency with ties broken by ascending column"""
    ranked = rank_by_frequency(np.array([0.5, 0.9, 0.5, 0.1]), [10, 11, 12, 13], 3)
    np.testing.assert_array_equal(ranked, [11, 10, 12])


def test_ovr_frequencies_in_unit_range(planted):
    """Test frequencies lie in [0, 1] and the informative columns lead"""
    table, labels = planted
    Z, _, _ = standardize_lenient(table.X)
    frequencies = ovr_frequencies(Z, labels, SelectionMethod.LASSO, FAST_LASSO)
    assert frequencies.shape == (table.n_features,)
    assert np.all((frequencies >= 0) & (frequencies <= 1))
    informative = [0, 1, 2, 3, 30]
    noise = [j for j in range(table.n_features) if j not in informative]
    assert frequencies[informative].min() > frequencies[noise].max()


def test_single_penalty_counts_classes():
    """Test with one penalty the frequency is the share of classes selecting a column"""
    table, labels = planted_features(n_per_class=8, n_classes=3, n_shape=4, n_volumetric=1, seed=2)
    Z, _, _ = standardize_lenient(table.X)
    config = SelectionConfig(method="lasso", lambda_grid=[1.0])
    frequencies = ovr_frequencies(Z, labels, SelectionMethod.LASSO, config)
    np.testing.assert_allclose(frequencies * 3, np.round(frequencies * 3))


def test_two_stage_finds_planted_columns(planted):
    """Test stage 1 keeps the informative shape columns and stage 2 adds the volumetric one"""
    table, labels = planted
    report = two_stage_select(table, labels, FAST_LASSO, seed=1)
    assert len(report.stage1.selected) == 8
    assert {0, 1, 2, 3} <= set(report.stage1.selected.tolist())
    assert sorted(report.selected.tolist()) == [0, 1, 2, 3, 30]
    assert report.selected_names[0] in table.feature_names
    assert report.method == "lasso"


def test_rank_demoted_loses_ties():
    """Test a demoted column ranks after every other column of equal frequency"""
    ranked = rank_by_frequency(np.zeros(4), [10, 11, 12, 13], 3, demoted=[True, False, False, False])
    np.testing.assert_array_equal(ranked, [11, 12, 13])
    ranked = rank_by_frequency(np.array([0.0, 0.2, 0.0, 0.0]), [10, 11, 12, 13], 2, demoted=[True, False, False, True])
    np.testing.assert_array_equal(ranked, [11, 12])


def test_constant_column_stays_candidate(planted):
    """Test a constant column is a candidate with frequency 0 and is never kept"""
    table, labels = planted
    report = two_stage_select(table, labels, FAST_LASSO, seed=1)
    candidates = report.stage1.candidates.tolist()
    assert len(candidates) == 30
    assert 5 in candidates
    assert report.stage1.frequencies[candidates.index(5)] == 0.0
    assert 5 not in report.stage1.selected.tolist()


def test_stage2_pool_keeps_constant_volumetric(planted):
    """Test the stage 2 pool is every stage 1 survivor plus every volumetric column"""
    table, labels = planted
    X = table.X.copy()
    X[:, 31] = 0.0
    report = two_stage_select(replace(table, X=X), labels, FAST_LASSO, seed=1)
    candidates = report.stage2.candidates.tolist()
    assert len(candidates) == FAST_LASSO.stage1_count + 6
    assert 31 in candidates
    assert report.stage2.frequencies[candidates.index(31)] == 0.0
    assert 31 not in report.selected.tolist()


def test_too_few_candidates(planted):
    table, labels = planted
    with pytest.raises(SelectionError):
        two_stage_select(table, labels, FAST_LASSO.model_copy(update={"stage1_count": 31}))


def test_single_class_rejected(planted):
    table, _ = planted
    with pytest.raises(SelectionError):
        ovr_frequencies(table.X, np.zeros(table.n_subjects, dtype=int), SelectionMethod.LASSO, FAST_LASSO)


def test_randomized_is_seeded(planted):
    """Test randomized frequencies repeat for a seed and favour the informative column"""
    table, labels = planted
    Z, _, _ = standardize_lenient(table.X)
    problem = replace(table, X=Z, y=np.where(labels == 0, 1.0, -1.0))
    grid = [0.2, 0.1, 0.05]
    first = randomized_logistic(problem, grid, 4, 0.75, 0.5, seed=3)
    np.testing.assert_array_equal(first, randomized_logistic(problem, grid, 4, 0.75, 0.5, seed=3))
    assert first[0] == first.max()
    with pytest.raises(SelectionError):
        randomized_logistic(problem, grid, 4, 0.01, 0.5, seed=3)


def test_randomized_two_stage(planted):
    """Test the randomized method also recovers the informative columns"""
    table, labels = planted
    config = SelectionConfig(method="randomized", n_resamples=4, n_lambdas=3, lambda_min_ratio=0.6,
                             stage1_count=8, stage2_count=5)
    report = two_stage_select(table, labels, config, seed=2)
    assert {0, 1, 2, 3} <= set(report.stage1.selected.tolist())
    assert report.method == "randomized"


def test_randomized_ovr_is_class_mean():
    """Test randomized one-vs-rest frequencies are the mean of the per-class stability paths"""
    table, labels = planted_features(n_per_class=8, n_classes=3, n_shape=4, n_volumetric=1, seed=2)
    Z, _, _ = standardize_lenient(table.X)
    grid = [0.2, 0.1]
    config = SelectionConfig(method="randomized", lambda_grid=grid, n_resamples=3)
    per_class = [
        randomized_logistic(
            FeatureMatrix(X=Z, feature_names=table.feature_names, y=np.where(labels == k, 1.0, -1.0), standardized=True),
            grid, 3, config.subsample_fraction, config.weakness, seed=7,
        )
        for k in range(3)
    ]
    frequencies = ovr_frequencies(Z, labels, SelectionMethod.RANDOMIZED, config, seed=7, feature_names=table.feature_names)
    np.testing.assert_allclose(frequencies, np.mean(per_class, axis=0))


def test_feature_matrix_rows_and_groups():
    """Test row subsets carry their ids and outcomes and group lookup keeps column order"""
    table, labels = planted_features(n_per_class=4, n_classes=2, n_shape=3, n_volumetric=2, seed=1)
    problem = replace(table, y=np.where(labels == 0, 1.0, -1.0))
    subset = problem.rows([1, 5])
    assert subset.subject_ids == ("s01", "s05")
    np.testing.assert_array_equal(subset.y, problem.y[[1, 5]])
    assert subset.feature_names == table.feature_names
    assert table.group_indices("volumetric") == [3, 4]
    assert table.group_indices("shape", "volumetric") == [0, 1, 2, 3, 4]
