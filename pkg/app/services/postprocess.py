"""
Post-processing of segmentations: keep the largest foreground component (the heart)
"""
import logging

import numpy as np
from scipy import ndimage

from app.models.segmentation import ComponentLabeling
from app.models.volume import BinaryMask, LabeledVolume
from app.utils.errors import UsageError

logger = logging.getLogger(__name__)

_STRUCTURES = {
    6: ndimage.generate_binary_structure(3, 1),
    26: ndimage.generate_binary_structure(3, 3),
}


def connected_components(mask: BinaryMask, connectivity: int = 26) -> ComponentLabeling:
    """
    Label face-connected (6) or fully connected (26) components.

    Ids are assigned in the volume's scan order (x fastest, then y, then z),
    so id 1 is the component met first.
    """
    if connectivity not in _STRUCTURES:
        raise UsageError(f"connectivity must be 6 or 26, got {connectivity}")
    # scipy numbers components in C order; transposing to (z, y, x) makes x the fastest axis
    labeled, n_components = ndimage.label(mask.bits.T, structure=_STRUCTURES[connectivity])
    component_ids = np.ascontiguousarray(labeled.T)
    sizes = np.bincount(component_ids.ravel(), minlength=n_components + 1)[1:]
    return ComponentLabeling(component_ids=component_ids, component_sizes=sizes.astype(np.int64))


def keep_largest_component(volume: LabeledVolume, connectivity: int = 26) -> LabeledVolume:
    """Zero every foreground voxel outside the largest component of the foreground union"""
    foreground = BinaryMask(bits=volume.foreground(), spacing=volume.spacing)
    labeling = connected_components(foreground, connectivity)
    if labeling.n_components <= 1:
        return volume

    # argmax returns the first maximum, i.e. the smallest id on ties
    keep_id = int(np.argmax(labeling.component_sizes)) + 1
    kept = np.where(labeling.component_ids == keep_id, volume.labels, 0)
    removed = foreground.count - labeling.size_of(keep_id)
    logger.info(
        f"Kept component {keep_id} of {labeling.n_components} "
        f"({labeling.size_of(keep_id)} voxels), removed {removed} voxels"
    )
    return volume.with_labels(kept)
