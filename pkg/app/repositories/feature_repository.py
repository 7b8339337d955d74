"""
Feature table and feature manifest data access layer.

Feature table CSV: subject_id, then one column per feature, one row per subject.
Manifest CSV: name, group, structure, phase, params ("key=value;key=value").
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from app.models.features import FeatureGroup, FeatureManifest, FeatureSpec
from app.models.learning import FeatureMatrix
from app.repositories.study_repository import StudyRepository
from app.storage import storage
from app.utils.errors import DataError, MissingFileError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
MANIFEST_COLUMNS = ["name", "group", "structure", "phase", "params"]


def format_params(params: Dict[str, str]) -> str:
    return ";".join(f"{key}={value}" for key, value in params.items())


def parse_params(text: str) -> Dict[str, str]:
    params = {}
    for item in filter(None, (part.strip() for part in text.split(";"))):
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise DataError(f"Malformed manifest params {text!r}")
        params[key.strip()] = value.strip()
    return params


def _require_file(path: PathLike) -> Path:
    target = Path(path)
    if not target.is_file():
        raise MissingFileError(str(target))
    return target


class FeatureRepository:
    """Repository for feature tables and feature manifests"""

    @staticmethod
    def write_manifest(manifest: FeatureManifest, path: PathLike) -> Path:
        frame = pd.DataFrame(
            [
                {
                    "name": e.name,
                    "group": e.group.value,
                    "structure": e.structure,
                    "phase": e.phase,
                    "params": format_params(e.params),
                }
                for e in manifest.entries
            ],
            columns=MANIFEST_COLUMNS,
        )
        with storage.open_atomic(path) as handle:
            frame.to_csv(handle, index=False, lineterminator="\n")
        return Path(path)

    @staticmethod
    def read_manifest(path: PathLike) -> FeatureManifest:
        manifest_path = _require_file(path)
        frame = pd.read_csv(manifest_path, dtype=str, keep_default_na=False)
        missing = [c for c in MANIFEST_COLUMNS if c not in frame.columns]
        if missing:
            raise DataError(f"Feature manifest {manifest_path} lacks columns {missing}")
        entries = []
        for row in frame.to_dict(orient="records"):
            try:
                group = FeatureGroup(row["group"])
            except ValueError:
                raise DataError(f"Feature manifest {manifest_path}: unknown group {row['group']!r} for {row['name']}")
            entries.append(FeatureSpec(
                name=row["name"],
                group=group,
                structure=row["structure"],
                phase=row["phase"],
                params=parse_params(row["params"]),
            ))
        logger.info(f"Read feature manifest {manifest_path}: {len(entries)} features")
        return FeatureManifest(entries=tuple(entries))

    @staticmethod
    def write_table(table: FeatureMatrix, path: PathLike) -> Path:
        """Values are written with 17 significant digits so they read back exactly"""
        frame = pd.DataFrame(table.X, columns=list(table.feature_names))
        frame.insert(0, "subject_id", list(table.subject_ids) or [str(i) for i in range(table.n_subjects)])
        with storage.open_atomic(path) as handle:
            frame.to_csv(handle, index=False, float_format="%.17g", lineterminator="\n")
        logger.info(f"Wrote feature table {path}: {table.n_subjects} x {table.n_features}")
        return Path(path)

    @staticmethod
    def read_table(path: PathLike, manifest: Optional[FeatureManifest] = None) -> FeatureMatrix:
        """
        Read a feature table; column groups come from the manifest, and every
        column must be listed there when one is given.
        """
        table_path = _require_file(path)
        frame = pd.read_csv(table_path, dtype={"subject_id": str}, keep_default_na=False, float_precision="round_trip")
        if frame.columns.empty or frame.columns[0] != "subject_id":
            raise DataError(f"Feature table {table_path} must start with a subject_id column")
        names = [str(c) for c in frame.columns[1:]]
        try:
            X = frame[names].to_numpy(dtype=float)
        except ValueError as e:
            raise DataError(f"Feature table {table_path} holds non-numeric values: {e}")

        groups = ()
        if manifest is not None:
            unknown = [n for n in names if manifest.find(n) is None]
            if unknown:
                raise DataError(f"Feature table {table_path} has columns missing from the manifest: {unknown[:5]}")
            groups = tuple(manifest.find(n).group.value for n in names)
        return FeatureMatrix(
            X=X,
            feature_names=tuple(names),
            subject_ids=tuple(frame["subject_id"]),
            groups=groups,
        )

    @staticmethod
    def read_labels(study_manifest: PathLike, subject_ids: Sequence[str]) -> np.ndarray:
        """Class labels of the given subjects, looked up in a study manifest"""
        records = {r.subject_id: r for r in StudyRepository.read_manifest(study_manifest)}
        labels: List[int] = []
        for subject_id in subject_ids:
            record = records.get(subject_id)
            if record is None:
                raise DataError(f"Subject {subject_id} is not listed in {study_manifest}")
            if record.class_label is None:
                raise DataError(f"Subject {subject_id} has no class label in {study_manifest}")
            labels.append(record.class_label)
        return np.asarray(labels, dtype=np.int64)
