"""
Connected-component labelings and segmentation scores
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class ComponentLabeling:
    """Per-voxel component id (0 = background) and voxel count per id 1..C"""
    component_ids: np.ndarray
    component_sizes: np.ndarray

    @property
    def n_components(self) -> int:
        return int(self.component_sizes.size)

    def size_of(self, component_id: int) -> int:
        return int(self.component_sizes[component_id - 1])


@dataclass(frozen=True)
class SegScore:
    """Agreement between a predicted and a reference mask"""
    dice: float
    hausdorff_mm: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.dice <= 1.0:
            raise ValueError(f"dice must lie in [0, 1], got {self.dice}")
        if self.hausdorff_mm is not None and self.hausdorff_mm < 0:
            raise ValueError(f"hausdorff_mm must be >= 0, got {self.hausdorff_mm}")
