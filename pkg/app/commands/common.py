"""
Helpers shared by the command modules
"""
import argparse
import logging
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from app.config import settings
from app.models.features import FeatureManifest
from app.models.learning import FeatureMatrix
from app.repositories.feature_repository import FeatureRepository
from app.repositories.study_repository import StudyRepository
from app.schemas.pipeline import PipelineConfig, load_config
from app.services.feature_extractor import default_manifest, extract_feature_table
from app.utils.errors import UsageError

logger = logging.getLogger(__name__)


def effective_config(args: argparse.Namespace) -> PipelineConfig:
    """Config file (or defaults) with the global command-line overrides applied"""
    config = load_config(getattr(args, "config", None))
    return config.with_overrides(
        seed=getattr(args, "seed", None),
        connectivity=getattr(args, "connectivity", None),
        n_jobs=getattr(args, "n_jobs", None),
        paper_order=True if getattr(args, "paper_order", False) else None,
    )


def output_dir(args: argparse.Namespace, config: PipelineConfig) -> Path:
    return Path(getattr(args, "out", None) or config.output_dir)


def resolve_manifest_path(path: Optional[str]) -> Optional[Path]:
    """A directory stands for the study manifest inside it"""
    if path is None:
        return None
    target = Path(path)
    return target / settings.MANIFEST_FILENAME if target.is_dir() else target


def study_manifest(args: argparse.Namespace, config: PipelineConfig) -> Path:
    path = resolve_manifest_path(getattr(args, "manifest", None) or config.study_manifest)
    if path is None:
        raise UsageError("No study manifest: pass --manifest or set study_manifest in the config")
    return path


def feature_manifest(args: argparse.Namespace, config: PipelineConfig) -> FeatureManifest:
    path = getattr(args, "feature_manifest", None) or config.feature_manifest
    return FeatureRepository.read_manifest(path) if path else default_manifest()


def extract_from_studies(manifest_path: Path, config: PipelineConfig, manifest: FeatureManifest) -> FeatureMatrix:
    studies = StudyRepository.load_studies(manifest_path, n_classes=config.n_classes, n_jobs=config.n_jobs)
    return extract_feature_table(studies, manifest, angular_step=config.angular_step, n_jobs=config.n_jobs)


def learning_data(args: argparse.Namespace, config: PipelineConfig) -> Tuple[FeatureMatrix, np.ndarray]:
    """
    Feature table plus class labels.

    The table comes from --features or the config, and is extracted from the
    study manifest when neither names one. Labels always come from the study
    manifest, matched on subject_id.
    """
    manifest = feature_manifest(args, config)
    labels_path = study_manifest(args, config)
    table_path = getattr(args, "features", None) or config.feature_table
    if table_path:
        table = FeatureRepository.read_table(table_path, manifest)
    else:
        logger.info(f"No feature table given; extracting from {labels_path}")
        table = extract_from_studies(labels_path, config, manifest)
    labels = FeatureRepository.read_labels(labels_path, table.subject_ids)
    return table, labels


def add_output_argument(parser: argparse.ArgumentParser, help_text: str = "Output directory (default: config output_dir)"):
    parser.add_argument("--out", default=None, help=help_text)
