"""
Feature commands: extraction and the feature manifest
"""
import argparse
import logging

from app.commands.common import (
    add_output_argument,
    effective_config,
    extract_from_studies,
    feature_manifest,
    output_dir,
    study_manifest,
)
from app.repositories.feature_repository import FeatureRepository
from app.services.feature_extractor import default_manifest

logger = logging.getLogger(__name__)


def cmd_extract(args: argparse.Namespace) -> int:
    """Write the subjects x features table of a cohort"""
    config = effective_config(args)
    manifest = feature_manifest(args, config)
    table = extract_from_studies(study_manifest(args, config), config, manifest)
    path = FeatureRepository.write_table(table, output_dir(args, config) / "features.csv")
    print(f"Wrote {table.n_subjects} subjects x {table.n_features} features to {path}")
    return 0


def cmd_manifest(args: argparse.Namespace) -> int:
    """Write the default feature manifest, a starting point for custom ones"""
    config = effective_config(args)
    manifest = default_manifest()
    path = FeatureRepository.write_manifest(manifest, output_dir(args, config) / "feature_manifest.csv")
    counts = ", ".join(f"{group} {count}" for group, count in manifest.group_counts().items())
    print(f"Wrote {len(manifest)} features ({counts}) to {path}")
    return 0


def register(subparsers: argparse._SubParsersAction):
    """Attach the feature commands to the root parser"""
    extract = subparsers.add_parser("extract", help="Extract the feature table of a cohort")
    extract.add_argument("--manifest", default=None, help="Study manifest CSV or its directory")
    extract.add_argument("--feature-manifest", default=None, help="Alternative feature manifest CSV")
    add_output_argument(extract)
    extract.set_defaults(handler=cmd_extract)

    manifest = subparsers.add_parser("manifest", help="Write the default feature manifest")
    add_output_argument(manifest)
    manifest.set_defaults(handler=cmd_manifest)
