"""
Feature assembly: evaluates a feature manifest against one study or a cohort
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from app.config import settings
from app.models.features import FeatureGroup, FeatureManifest, FeatureSpec, FeatureVector, ThicknessProfile
from app.models.learning import FeatureMatrix
from app.models.volume import Structure, SubjectStudy, extract_mask
from app.services.shape_features import measure_shape, shape_specs, shape_value
from app.services.thickness_features import thickness_profile, thickness_specs, thickness_value
from app.services.volumetric_features import structure_volumes, volumetric_specs, volumetric_value
from app.utils.errors import CardiacPipelineError, DataError, FeatureExtractionError

logger = logging.getLogger(__name__)


def default_manifest() -> FeatureManifest:
    """12 volumetric, 54 thickness and 59 shape features"""
    return FeatureManifest(entries=tuple(volumetric_specs() + thickness_specs() + shape_specs()))


class _StudyCache:
    """Per-study memo of the expensive intermediates"""

    def __init__(self, study: SubjectStudy, angular_step: float):
        self.study = study
        self.angular_step = angular_step
        self._volumes = None
        self._profiles: Dict[str, ThicknessProfile] = {}
        self._shapes: Dict[Tuple[str, str], Dict[str, float]] = {}

    def volumes(self):
        if self._volumes is None:
            self._volumes = structure_volumes(self.study)
        return self._volumes

    def profile(self, phase: str) -> ThicknessProfile:
        if phase not in self._profiles:
            self._profiles[phase] = thickness_profile(self.study.phase(phase), self.angular_step)
        return self._profiles[phase]

    def shape(self, structure: str, phase: str) -> Dict[str, float]:
        key = (structure, phase)
        if key not in self._shapes:
            mask = extract_mask(self.study.phase(phase), Structure[structure])
            self._shapes[key] = measure_shape(mask)
        return self._shapes[key]


def _evaluate(cache: _StudyCache, spec: FeatureSpec) -> float:
    if spec.group == FeatureGroup.VOLUMETRIC:
        return volumetric_value(cache.volumes(), spec)
    if spec.group == FeatureGroup.THICKNESS:
        return thickness_value(cache.profile(spec.phase), spec)
    if spec.group == FeatureGroup.SHAPE:
        return shape_value(cache.shape(spec.structure, spec.phase), spec)
    raise DataError(f"Unknown feature group {spec.group!r}")


def assemble_features(
    study: SubjectStudy,
    manifest: Optional[FeatureManifest] = None,
    angular_step: Optional[float] = None,
) -> FeatureVector:
    """
    Evaluate every manifest entry in order.

    Any failure is re-raised as FeatureExtractionError naming the entry and
    the subject.
    """
    manifest = manifest or default_manifest()
    cache = _StudyCache(study, angular_step or settings.THICKNESS_ANGULAR_STEP)
    values = []
    for spec in manifest.entries:
        try:
            value = _evaluate(cache, spec)
        except (CardiacPipelineError, KeyError, ValueError, ZeroDivisionError) as e:
            logger.error(f"Subject {study.subject_id}: feature {spec.name} failed: {e}")
            raise FeatureExtractionError(spec.name, e, study.subject_id) from e
        if not np.isfinite(value):
            raise FeatureExtractionError(spec.name, DataError(f"non-finite value {value}"), study.subject_id)
        values.append(float(value))
    logger.info(f"Extracted {len(values)} features for subject {study.subject_id}")
    return FeatureVector(names=tuple(manifest.names), values=np.asarray(values))


def extract_feature_table(
    studies: Sequence[SubjectStudy],
    manifest: Optional[FeatureManifest] = None,
    angular_step: Optional[float] = None,
    n_jobs: int = 1,
) -> FeatureMatrix:
    """Feature vectors of a cohort stacked into a matrix, rows in study order"""
    if len(studies) < 2:
        raise DataError(f"A feature table needs at least 2 subjects, got {len(studies)}")
    manifest = manifest or default_manifest()
    vectors: List[FeatureVector] = Parallel(n_jobs=n_jobs)(
        delayed(assemble_features)(study, manifest, angular_step) for study in studies
    )
    return FeatureMatrix(
        X=np.vstack([v.values for v in vectors]),
        feature_names=tuple(manifest.names),
        subject_ids=tuple(s.subject_id for s in studies),
        groups=tuple(g.value for g in manifest.groups),
    )
