"""
Feature selection: randomized logistic stability paths, one-vs-rest frequency
aggregation and the two-stage 30 -> 20 selection
"""
import logging
from typing import List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from app.models.features import FeatureGroup
from app.models.learning import FeatureMatrix, SelectionReport, TwoStageReport
from app.schemas.pipeline import SelectionConfig, SelectionMethod
from app.services.l1_logistic import l1_logistic_fit, logistic_lambda_max
from app.services.lasso import lambda_max, lasso_path
from app.services.standardizer import constant_columns, standardize_lenient
from app.utils.errors import SelectionError

logger = logging.getLogger(__name__)

SUPPORT_TOL = 1e-9


def lambda_grid(lambda_top: float, n_lambdas: int = 20, min_ratio: float = 1e-4) -> np.ndarray:
    """Logarithmic grid over [min_ratio * lambda_top, lambda_top], largest first"""
    if lambda_top <= 0:
        return np.zeros(1)
    if n_lambdas == 1:
        return np.array([lambda_top])
    return np.logspace(np.log10(lambda_top), np.log10(lambda_top * min_ratio), n_lambdas)


def _resample_frequencies(
    data: FeatureMatrix,
    lambdas: np.ndarray,
    n_rows: int,
    weakness: float,
    seed_seq: np.random.SeedSequence,
) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    rows = np.sort(rng.choice(data.n_subjects, size=n_rows, replace=False))
    factors = rng.uniform(weakness, 1.0, size=data.n_features)
    subset = data.rows(rows) if n_rows < data.n_subjects else data
    counts = np.zeros(data.n_features)
    w, v = None, None
    for lam in sorted(lambdas, reverse=True):
        model = l1_logistic_fit(subset, float(lam), penalty_factors=factors, w0=w, v0=v)
        w, v = model.w, model.v
        counts += np.abs(model.w) > SUPPORT_TOL
    return counts


def randomized_logistic(
    data: FeatureMatrix,
    lambda_grid: Sequence[float],
    n_resamples: int,
    subsample_fraction: float,
    weakness: float,
    seed: int,
    n_jobs: int = 1,
) -> np.ndarray:
    """
    Stability path of L1 logistic regression.

    Each resample draws floor(fraction * N) rows without replacement and scales
    each feature's penalty by a factor drawn from [weakness, 1]; the frequency
    of a feature is the share of (resample, lambda) fits keeping it. Resample r
    always uses the r-th child stream of the seed, so results do not depend on
    n_jobs.
    """
    lambdas = np.asarray(list(lambda_grid), dtype=float)
    if lambdas.size == 0:
        raise SelectionError("Penalty grid is empty")
    if n_resamples < 1:
        raise SelectionError(f"Need at least one resample, got {n_resamples}")
    if not 0 < subsample_fraction <= 1 or not 0 < weakness <= 1:
        raise SelectionError("Subsample fraction and weakness must lie in (0, 1]")
    n_rows = int(np.floor(subsample_fraction * data.n_subjects))
    if n_rows < 2:
        raise SelectionError(f"Subsample fraction {subsample_fraction} leaves {n_rows} rows")

    streams = np.random.SeedSequence(seed).spawn(n_resamples)
    counts = Parallel(n_jobs=n_jobs)(
        delayed(_resample_frequencies)(data, lambdas, n_rows, weakness, stream) for stream in streams
    )
    return np.sum(counts, axis=0) / (n_resamples * lambdas.size)


def _binary_frequencies(data: FeatureMatrix, method: SelectionMethod, config: SelectionConfig, seed: int, n_jobs: int) -> np.ndarray:
    """Selection frequency of each feature for one +1/-1 problem"""
    if method == SelectionMethod.LASSO:
        top = lambda_max(data)
    else:
        top = logistic_lambda_max(data)
    grid = (
        np.asarray(config.lambda_grid, dtype=float)
        if config.lambda_grid is not None
        else lambda_grid(top, config.n_lambdas, config.lambda_min_ratio)
    )
    if grid.size == 0:
        raise SelectionError("Penalty grid is empty")

    if method == SelectionMethod.RANDOMIZED:
        return randomized_logistic(
            data, grid, config.n_resamples, config.subsample_fraction, config.weakness, seed, n_jobs
        )

    counts = np.zeros(data.n_features)
    if method == SelectionMethod.LASSO:
        for model in lasso_path(data, grid):
            counts += np.abs(model.beta) > SUPPORT_TOL
    else:
        w, v = None, None
        for lam in sorted(grid, reverse=True):
            model = l1_logistic_fit(data, float(lam), w0=w, v0=v)
            w, v = model.w, model.v
            counts += np.abs(model.w) > SUPPORT_TOL
    return counts / grid.size


def ovr_frequencies(
    X: np.ndarray,
    labels: np.ndarray,
    method: SelectionMethod,
    config: Optional[SelectionConfig] = None,
    seed: int = 0,
    n_jobs: int = 1,
    feature_names: Sequence[str] = (),
) -> np.ndarray:
    """
    Mean over classes of the one-vs-rest selection frequencies.

    Class k is recoded +1 and every other class -1. With a single penalty and a
    deterministic method this is the number of classes selecting a feature
    divided by K. The randomized method is averaged the same way: its per-class
    stability frequencies are summed and divided by K, never multiplied.
    Randomized problems share one set of resample streams across classes.
    """
    config = config or SelectionConfig()
    method = SelectionMethod(method)
    labels = np.asarray(labels, dtype=np.int64)
    classes = np.unique(labels)
    if classes.size < 2:
        raise SelectionError(f"One-vs-rest needs at least 2 classes, got {classes.size}")
    counts = np.bincount(labels - labels.min())
    small = [int(c) for c in classes if counts[c - labels.min()] < 2]
    if small:
        raise SelectionError(f"Classes {small} have fewer than 2 members")

    names = tuple(feature_names) or tuple(f"f{j}" for j in range(X.shape[1]))
    frequencies = np.zeros(X.shape[1])
    for k in classes:
        y = np.where(labels == k, 1.0, -1.0)
        problem = FeatureMatrix(X=X, feature_names=names, y=y, standardized=True)
        frequencies += _binary_frequencies(problem, method, config, seed, n_jobs)
    return frequencies / classes.size


def rank_by_frequency(
    frequencies: np.ndarray,
    column_indices: Sequence[int],
    count: int,
    demoted: Optional[Sequence[bool]] = None,
) -> np.ndarray:
    """
    Top `count` columns by descending frequency, ties by ascending column index.
    Demoted columns (constant ones) lose every tie against the others.
    """
    column_indices = np.asarray(column_indices, dtype=np.int64)
    demoted = np.zeros(column_indices.size, dtype=bool) if demoted is None else np.asarray(demoted, dtype=bool)
    order = np.lexsort((column_indices, demoted, -np.asarray(frequencies)))
    return column_indices[order[:count]]


def two_stage_select(
    full: FeatureMatrix,
    labels: np.ndarray,
    config: Optional[SelectionConfig] = None,
    seed: int = 0,
    n_jobs: int = 1,
) -> TwoStageReport:
    """
    Stage 1 ranks the thickness and shape columns and keeps the top 30; stage 2
    pools those with every volumetric column and keeps the top 20. Columns are
    standardized here; a constant column stays a candidate with frequency 0
    and ranks after every non-constant column.
    """
    config = config or SelectionConfig()
    if not full.groups:
        raise SelectionError("Feature matrix carries no feature groups")
    constant = constant_columns(full.X)
    candidates1 = full.group_indices(FeatureGroup.THICKNESS.value, FeatureGroup.SHAPE.value)
    if len(candidates1) < config.stage1_count:
        raise SelectionError(
            f"Stage 1 needs {config.stage1_count} thickness/shape columns, found {len(candidates1)}"
        )

    Z, _, _ = standardize_lenient(full.X)
    stage_seeds = np.random.SeedSequence(seed).generate_state(2)

    def run_stage(stage: int, columns: List[int], count: int) -> SelectionReport:
        frequencies = ovr_frequencies(
            Z[:, columns], labels, config.method, config, int(stage_seeds[stage - 1]), n_jobs,
            feature_names=[full.feature_names[j] for j in columns],
        )
        selected = rank_by_frequency(frequencies, columns, count, demoted=constant[columns])
        logger.info(
            f"Selection stage {stage}: {len(columns)} candidates -> {len(selected)} kept "
            f"(top frequency {frequencies.max():.3f})"
        )
        return SelectionReport(
            stage=stage,
            candidates=np.asarray(columns, dtype=np.int64),
            frequencies=frequencies,
            selected=selected,
        )

    stage1 = run_stage(1, candidates1, config.stage1_count)
    candidates2 = [int(j) for j in stage1.selected] + full.group_indices(FeatureGroup.VOLUMETRIC.value)
    if len(candidates2) < config.stage2_count:
        raise SelectionError(f"Stage 2 needs {config.stage2_count} candidates, found {len(candidates2)}")
    stage2 = run_stage(2, candidates2, config.stage2_count)

    return TwoStageReport(
        stage1=stage1,
        stage2=stage2,
        feature_names=full.feature_names,
        method=SelectionMethod(config.method).value,
        seed=seed,
        params=config.model_dump(mode="json"),
    )
