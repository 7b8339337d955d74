"""
Learning commands: selection, training, classification, cross-validation,
the end-to-end pipeline and the selection-method comparison
"""
import argparse
import logging
from dataclasses import replace
from pathlib import Path
from typing import Callable, Dict, List, TypeVar

import numpy as np

from app.commands.common import (
    add_output_argument,
    effective_config,
    feature_manifest,
    learning_data,
    output_dir,
    study_manifest,
)
from app.models.classifiers import TrainedEnsemble
from app.models.learning import FeatureMatrix
from app.repositories.feature_repository import FeatureRepository
from app.repositories.report_repository import ReportRepository
from app.schemas.pipeline import PipelineConfig, SelectionMethod
from app.schemas.reports import ComparisonReport, CvReport, SelectionDocument
from app.services.ensemble import predict_ensemble, train_ensemble
from app.services.evaluation import compare_selection_methods, grid_search, run_cv
from app.services.feature_selection import two_stage_select
from app.utils.errors import CardiacPipelineError, DataError, StageFailedError, UsageError

logger = logging.getLogger(__name__)

T = TypeVar("T")


def select_and_train(table: FeatureMatrix, labels: np.ndarray, config: PipelineConfig):
    """Two-stage selection on every subject, then the ensemble on the selected columns"""
    report = two_stage_select(table, labels, config.selection, seed=config.seed, n_jobs=config.n_jobs)
    document = SelectionDocument.from_report(report, config.model_dump(mode="json"))
    columns = [int(c) for c in report.selected]
    ensemble = train_ensemble(
        table.X[:, columns],
        labels,
        config.classifier,
        seed=config.seed,
        n_classes=config.n_classes,
        feature_names=[table.feature_names[c] for c in columns],
        class_names=config.resolved_class_names(),
    )
    return document, replace(ensemble, selection=document.model_dump(mode="json"))


def cmd_select(args: argparse.Namespace) -> int:
    """Run the two-stage selection once on every subject"""
    config = effective_config(args)
    table, labels = learning_data(args, config)
    report = two_stage_select(table, labels, config.selection, seed=config.seed, n_jobs=config.n_jobs)
    document = SelectionDocument.from_report(report, config.model_dump(mode="json"))
    path = ReportRepository.write_document(document, output_dir(args, config) / "selection.json")
    print(f"Selected {len(document.stage2.selected)} features ({document.method}):")
    for name in document.stage2.selected_names:
        print(f"  {name}")
    print(f"Wrote {path}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    """Select features and fit the voting ensemble on every subject"""
    config = effective_config(args)
    table, labels = learning_data(args, config)
    _, ensemble = select_and_train(table, labels, config)
    path = ReportRepository.write_model(ensemble, output_dir(args, config) / "model.json")
    print(f"Trained ensemble on {table.n_subjects} subjects x {len(ensemble.feature_names)} features; wrote {path}")
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    """Predict the class of every subject of a feature table with a trained ensemble"""
    config = effective_config(args)
    directory = output_dir(args, config)
    ensemble: TrainedEnsemble = ReportRepository.load_model(args.model or directory / "model.json")
    table_path = args.features or config.feature_table
    if not table_path:
        raise UsageError("No feature table: pass --features or set feature_table in the config")
    table = FeatureRepository.read_table(table_path)
    missing = [n for n in ensemble.feature_names if n not in table.feature_names]
    if missing:
        raise DataError(f"Feature table {table_path} lacks model features {missing[:5]}")
    columns = [table.feature_names.index(n) for n in ensemble.feature_names]
    predicted, combined = predict_ensemble(ensemble, table.X[:, columns])
    path = ReportRepository.write_predictions(
        table.subject_ids, predicted, combined, ensemble.class_names, directory / "predictions.csv"
    )
    print(f"Classified {table.n_subjects} subjects; wrote {path}")
    return 0


def cmd_cv(args: argparse.Namespace) -> int:
    """Repeated k-fold CV, or a grid search when the config holds a parameter grid"""
    config = effective_config(args)
    table, labels = learning_data(args, config)
    directory = output_dir(args, config)
    if config.cv.param_grid:
        result = grid_search(table, labels, config.cv.param_grid, config)
        paths = ReportRepository.write_grid_search(result, directory)
        best = result.points[result.best_index]
        print(f"Best of {len(result.points)} grid points: {best.params} ({100 * best.mean:.2f}% ± {100 * best.std:.2f}%)")
    else:
        report = run_cv(table, labels, config)
        paths = ReportRepository.write_cv_report(report, directory)
        print(report.summary_line())
    print(f"Wrote {', '.join(str(p) for p in paths)}")
    return 0


def _stage(name: str, action: Callable[[], T]) -> T:
    try:
        return action()
    except CardiacPipelineError as e:
        logger.error(f"Pipeline stage {name} failed: {e.detail}")
        raise StageFailedError(name, e) from e


def format_accuracy_table(reports: List[CvReport]) -> str:
    lines = [f"{'Method':<34}{'Accuracy':>20}"]
    for report in reports:
        label = f"{report.method} ({report.mode})"
        lines.append(f"{label:<34}{100 * report.mean:>11.2f}% ± {100 * report.std:.2f}%")
    return "\n".join(lines)


def cmd_pipeline(args: argparse.Namespace) -> int:
    """Extract (when needed), select, train and cross-validate in one run"""
    config = effective_config(args)
    directory = output_dir(args, config)
    table, labels = _stage("extract", lambda: learning_data(args, config))
    if not (getattr(args, "features", None) or config.feature_table):
        FeatureRepository.write_table(table, directory / "features.csv")

    document, ensemble = _stage("select+train", lambda: select_and_train(table, labels, config))
    ReportRepository.write_document(document, directory / "selection.json")
    ReportRepository.write_model(ensemble, directory / "model.json")

    report = _stage("cv", lambda: run_cv(table, labels, config))
    ReportRepository.write_cv_report(report, directory)
    print(format_accuracy_table([report]))
    return 0


def parse_tables(items: List[str]) -> Dict[str, Path]:
    tables: Dict[str, Path] = {}
    for item in items:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"--table expects NAME=PATH, got {item!r}")
        if name in tables:
            raise UsageError(f"Table name {name} given twice")
        tables[name] = Path(path)
    return tables


def format_comparison(report: ComparisonReport) -> str:
    width = 22
    lines = [f"{'Source':<12}" + "".join(f"{m:>{width}}" for m in report.methods)]
    for source in report.sources:
        cells = [report.cell(source, m) for m in report.methods]
        lines.append(f"{source:<12}" + "".join(f"{f'{100 * c.mean:.2f}% ± {100 * c.std:.2f}%':>{width}}" for c in cells))
    for drop in report.drops:
        lines.append(f"drop {drop.reference} -> {drop.source} ({drop.method}): {100 * drop.drop:.2f} points")
    return "\n".join(lines)


def cmd_compare_selection(args: argparse.Namespace) -> int:
    """CV accuracy of every selection method on every feature table"""
    config = effective_config(args)
    if not args.table:
        raise UsageError("compare-selection needs at least one --table NAME=PATH")
    manifest = feature_manifest(args, config)
    labels_path = study_manifest(args, config)
    tables = {name: FeatureRepository.read_table(path, manifest) for name, path in parse_tables(args.table).items()}
    first = next(iter(tables.values()))
    labels = FeatureRepository.read_labels(labels_path, first.subject_ids)
    methods = [SelectionMethod(m) for m in args.methods] if args.methods else list(SelectionMethod)

    report = compare_selection_methods(tables, labels, config, methods)
    paths = ReportRepository.write_comparison(report, output_dir(args, config))
    print(format_comparison(report))
    print(f"Wrote {', '.join(str(p) for p in paths)}")
    return 0


def _add_data_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--manifest", default=None, help="Study manifest CSV or its directory (class labels)")
    parser.add_argument("--features", default=None, help="Feature table CSV; extracted from the studies when unset")
    parser.add_argument("--feature-manifest", default=None, help="Feature manifest CSV (feature groups)")
    add_output_argument(parser)


def register(subparsers: argparse._SubParsersAction):
    """Attach the learning commands to the root parser"""
    select = subparsers.add_parser("select", help="Two-stage feature selection on every subject")
    _add_data_arguments(select)
    select.set_defaults(handler=cmd_select)

    train = subparsers.add_parser("train", help="Select features and train the voting ensemble")
    _add_data_arguments(train)
    train.set_defaults(handler=cmd_train)

    classify = subparsers.add_parser("classify", help="Predict classes with a trained ensemble")
    classify.add_argument("--model", default=None, help="Trained ensemble JSON (default: <out>/model.json)")
    classify.add_argument("--features", default=None, help="Feature table CSV")
    add_output_argument(classify)
    classify.set_defaults(handler=cmd_classify)

    cv = subparsers.add_parser("cv", help="Repeated k-fold cross-validation or grid search")
    _add_data_arguments(cv)
    cv.set_defaults(handler=cmd_cv)

    pipeline = subparsers.add_parser("pipeline", help="Extract, select, train and cross-validate")
    _add_data_arguments(pipeline)
    pipeline.set_defaults(handler=cmd_pipeline)

    compare = subparsers.add_parser("compare-selection", help="Compare selection methods across feature tables")
    compare.add_argument("--table", action="append", default=[], metavar="NAME=PATH", help="Feature table; repeatable")
    compare.add_argument("--methods", nargs="+", choices=[m.value for m in SelectionMethod], default=None)
    compare.add_argument("--manifest", default=None, help="Study manifest CSV or its directory (class labels)")
    compare.add_argument("--feature-manifest", default=None, help="Feature manifest CSV (feature groups)")
    add_output_argument(compare)
    compare.set_defaults(handler=cmd_compare_selection)
