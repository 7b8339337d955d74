"""
Segmentation agreement metrics: Dice coefficient and symmetric Hausdorff distance
"""
import logging
from typing import Dict, Iterable, List, Optional

import numpy as np
from scipy import ndimage
from scipy.spatial.distance import directed_hausdorff

from app.models.segmentation import SegScore
from app.models.volume import BinaryMask, LabeledVolume, Structure, extract_mask
from app.utils.errors import DimensionMismatchError, UndefinedDistanceError

logger = logging.getLogger(__name__)

_FACE_NEIGHBORS = ndimage.generate_binary_structure(3, 1)


def _check_dims(a: BinaryMask, b: BinaryMask):
    if a.dims != b.dims:
        raise DimensionMismatchError(a.dims, b.dims)


def dice(a: BinaryMask, b: BinaryMask) -> float:
    """2|A∩B| / (|A| + |B|); two empty masks agree perfectly"""
    _check_dims(a, b)
    total = a.count + b.count
    if total == 0:
        return 1.0
    overlap = int(np.count_nonzero(a.bits & b.bits))
    return 2.0 * overlap / total


def boundary_points(mask: BinaryMask) -> np.ndarray:
    """Physical centers of true voxels with a false or out-of-grid face neighbor, shape (n, 3)"""
    if mask.is_empty():
        return np.zeros((0, 3))
    interior = ndimage.binary_erosion(mask.bits, structure=_FACE_NEIGHBORS, border_value=0)
    boundary = mask.bits & ~interior
    return np.argwhere(boundary).astype(float) * np.asarray(mask.spacing)


def hausdorff(a: BinaryMask, b: BinaryMask) -> float:
    """Symmetric (maximum) Hausdorff distance in mm between the two boundaries"""
    _check_dims(a, b)
    if a.spacing != b.spacing:
        raise DimensionMismatchError(a.spacing, b.spacing, what="spacing")
    if a.is_empty() or b.is_empty():
        raise UndefinedDistanceError()
    pa = boundary_points(a)
    pb = boundary_points(b)
    forward = directed_hausdorff(pa, pb)[0]
    backward = directed_hausdorff(pb, pa)[0]
    return float(max(forward, backward))


def score_structure(predicted: BinaryMask, truth: BinaryMask) -> SegScore:
    """Dice plus Hausdorff; Hausdorff left undefined when either mask is empty"""
    overlap = dice(predicted, truth)
    try:
        distance: Optional[float] = hausdorff(predicted, truth)
    except UndefinedDistanceError:
        logger.warning("Hausdorff distance undefined: empty mask")
        distance = None
    return SegScore(dice=overlap, hausdorff_mm=distance)


def score_volumes(predicted: LabeledVolume, truth: LabeledVolume) -> Dict[str, SegScore]:
    """Per-structure scores (LV, MC, RV) for one label-map pair"""
    if predicted.dims != truth.dims:
        raise DimensionMismatchError(predicted.dims, truth.dims)
    return {
        s.name: score_structure(extract_mask(predicted, s), extract_mask(truth, s))
        for s in (Structure.LV, Structure.MC, Structure.RV)
    }


def summarize_scores(rows: Iterable[Dict]) -> List[Dict]:
    """
    Mean and population std per structure.

    Each row needs ``structure``, ``dice`` and ``hausdorff_mm`` (None when
    undefined); undefined distances are left out of the Hausdorff statistics
    and counted in ``n_undefined``.
    """
    by_structure: Dict[str, List[Dict]] = {}
    for row in rows:
        by_structure.setdefault(row["structure"], []).append(row)

    summary = []
    for structure in sorted(by_structure, key=lambda name: Structure[name].value, reverse=True):
        group = by_structure[structure]
        dices = np.array([r["dice"] for r in group], dtype=float)
        distances = np.array([r["hausdorff_mm"] for r in group if r["hausdorff_mm"] is not None], dtype=float)
        summary.append({
            "structure": structure,
            "n": len(group),
            "dice_mean": float(dices.mean()),
            "dice_std": float(dices.std()),
            "hausdorff_mean": float(distances.mean()) if distances.size else None,
            "hausdorff_std": float(distances.std()) if distances.size else None,
            "n_undefined": len(group) - int(distances.size),
        })
    return summary
