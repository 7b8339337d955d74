"""
Study manifest data access layer (CSV: subject_id, ed_path, es_path, class_label)
"""
import logging
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd
from joblib import Parallel, delayed
from pydantic import ValidationError

from app.config import settings
from app.models.volume import SubjectStudy
from app.repositories.volume_repository import VolumeRepository
from app.schemas.volume import StudyRecord
from app.storage import storage
from app.utils.errors import DataError, MissingFileError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
MANIFEST_COLUMNS = ["subject_id", "ed_path", "es_path", "class_label"]


class StudyRepository:
    """Repository for study manifests and the studies they reference"""

    @staticmethod
    def read_manifest(path: PathLike) -> List[StudyRecord]:
        """Parse a manifest; an empty class_label cell means unknown"""
        manifest_path = Path(path)
        if not manifest_path.is_file():
            raise MissingFileError(str(manifest_path))
        frame = pd.read_csv(manifest_path, dtype=str, keep_default_na=False)
        missing = [c for c in MANIFEST_COLUMNS if c not in frame.columns]
        if missing:
            raise DataError(f"Manifest {manifest_path} lacks columns {missing}")

        records = []
        for row in frame.to_dict(orient="records"):
            label = row["class_label"].strip()
            try:
                records.append(StudyRecord(
                    subject_id=row["subject_id"],
                    ed_path=row["ed_path"],
                    es_path=row["es_path"],
                    class_label=int(label) if label else None,
                ))
            except (ValueError, ValidationError) as e:
                raise DataError(f"Manifest {manifest_path}, subject {row['subject_id']!r}: {e}")

        seen = set()
        for record in records:
            if record.subject_id in seen:
                raise DataError(f"Manifest {manifest_path} lists subject {record.subject_id} twice")
            seen.add(record.subject_id)
        logger.info(f"Read manifest {manifest_path}: {len(records)} subjects")
        return records

    @staticmethod
    def write_manifest(records: List[StudyRecord], path: PathLike) -> Path:
        frame = pd.DataFrame(
            [
                {
                    "subject_id": r.subject_id,
                    "ed_path": r.ed_path,
                    "es_path": r.es_path,
                    "class_label": "" if r.class_label is None else str(r.class_label),
                }
                for r in records
            ],
            columns=MANIFEST_COLUMNS,
        )
        with storage.open_atomic(path) as handle:
            frame.to_csv(handle, index=False, lineterminator="\n")
        return Path(path)

    @staticmethod
    def load_study(record: StudyRecord, base_dir: PathLike, n_classes: Optional[int] = None) -> SubjectStudy:
        """Load the ED/ES pair of one record; relative paths resolve against base_dir"""
        base = Path(base_dir)
        ed = VolumeRepository.load_volume(base / record.ed_path)
        es = VolumeRepository.load_volume(base / record.es_path)
        return SubjectStudy(
            subject_id=record.subject_id,
            ed=ed,
            es=es,
            class_label=record.class_label,
            n_classes=n_classes or settings.N_CLASSES,
        )

    @staticmethod
    def load_studies(
        manifest_path: PathLike,
        n_classes: Optional[int] = None,
        n_jobs: int = 1,
    ) -> List[SubjectStudy]:
        """Load every study of a manifest, in manifest order"""
        records = StudyRepository.read_manifest(manifest_path)
        base = Path(manifest_path).parent
        studies = Parallel(n_jobs=n_jobs)(
            delayed(StudyRepository.load_study)(record, base, n_classes) for record in records
        )
        return list(studies)
