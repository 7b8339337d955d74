"""
Labeled voxel volumes, binary masks and subject studies
"""
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Optional, Tuple

import numpy as np

from app.utils.errors import DataError, DimensionMismatchError, InvalidLabelError

Dims = Tuple[int, int, int]
Spacing = Tuple[float, float, float]


class Structure(IntEnum):
    """Label codes of the four anatomical classes"""
    BG = 0
    RV = 1
    MC = 2
    LV = 3


LABEL_CODES = {s.name: int(s) for s in Structure}


class Phase(str, Enum):
    """Cardiac phase of a label map"""
    ED = "ED"
    ES = "ES"


def _check_spacing(spacing) -> Spacing:
    values = tuple(float(s) for s in spacing)
    if len(values) != 3 or not all(math.isfinite(s) and s > 0 for s in values):
        raise DataError(f"Spacing must be three positive finite values, got {spacing}")
    return values


def _check_dims(dims) -> Dims:
    values = tuple(int(d) for d in dims)
    if len(values) != 3 or any(d <= 0 for d in values):
        raise DataError(f"Dims must be three positive voxel counts, got {dims}")
    return values


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class LabeledVolume:
    """3D label map indexed [x, y, z] with spacing in mm per voxel"""
    labels: np.ndarray
    spacing: Spacing

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 3:
            raise DataError(f"Label array must be 3D, got shape {labels.shape}")
        _check_dims(labels.shape)
        bad = np.setdiff1d(np.unique(labels), np.arange(4))
        if bad.size:
            raise InvalidLabelError(bad)
        object.__setattr__(self, "labels", _frozen(labels.astype(np.uint8)))
        object.__setattr__(self, "spacing", _check_spacing(self.spacing))

    @classmethod
    def from_flat(cls, flat: np.ndarray, dims: Dims, spacing: Spacing) -> "LabeledVolume":
        """Build from an x-fastest flat array of nx*ny*nz codes"""
        dims = _check_dims(dims)
        flat = np.asarray(flat)
        if flat.size != dims[0] * dims[1] * dims[2]:
            raise DimensionMismatchError((flat.size,), (dims[0] * dims[1] * dims[2],), what="payload size")
        return cls(labels=flat.reshape(dims, order="F"), spacing=spacing)

    @property
    def dims(self) -> Dims:
        return tuple(int(d) for d in self.labels.shape)

    @property
    def voxel_volume_mm3(self) -> float:
        sx, sy, sz = self.spacing
        return sx * sy * sz

    def flat_labels(self) -> np.ndarray:
        """Labels in x-fastest order, then y, then z"""
        return self.labels.ravel(order="F")

    def foreground(self) -> np.ndarray:
        return self.labels != Structure.BG

    def with_labels(self, labels: np.ndarray) -> "LabeledVolume":
        return LabeledVolume(labels=labels, spacing=self.spacing)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledVolume):
            return NotImplemented
        return self.spacing == other.spacing and np.array_equal(self.labels, other.labels)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Boolean voxel mask sharing dims and spacing with its source volume"""
    bits: np.ndarray
    spacing: Spacing

    def __post_init__(self):
        bits = np.asarray(self.bits)
        if bits.ndim != 3:
            raise DataError(f"Mask array must be 3D, got shape {bits.shape}")
        object.__setattr__(self, "bits", _frozen(bits.astype(bool)))
        object.__setattr__(self, "spacing", _check_spacing(self.spacing))

    @property
    def dims(self) -> Dims:
        return tuple(int(d) for d in self.bits.shape)

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def is_empty(self) -> bool:
        return self.count == 0

    def coordinates_mm(self) -> np.ndarray:
        """Physical centers (index * spacing) of true voxels, shape (n, 3)"""
        return np.argwhere(self.bits).astype(float) * np.asarray(self.spacing)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.spacing == other.spacing and np.array_equal(self.bits, other.bits)

    __hash__ = None


@dataclass(frozen=True)
class SubjectStudy:
    """One subject's end-diastole / end-systole label maps"""
    subject_id: str
    ed: LabeledVolume
    es: LabeledVolume
    class_label: Optional[int] = None
    n_classes: int = field(default=5)

    def __post_init__(self):
        if self.ed.spacing != self.es.spacing:
            raise DataError(
                f"Subject {self.subject_id}: ED spacing {self.ed.spacing} differs from ES spacing {self.es.spacing}"
            )
        if self.n_classes < 2:
            raise DataError(f"Number of classes must be >= 2, got {self.n_classes}")
        if self.class_label is not None and not 0 <= self.class_label < self.n_classes:
            raise DataError(
                f"Subject {self.subject_id}: class label {self.class_label} outside 0..{self.n_classes - 1}"
            )

    def phase(self, name: str) -> LabeledVolume:
        if name == Phase.ED.value:
            return self.ed
        if name == Phase.ES.value:
            return self.es
        raise DataError(f"Unknown phase {name}; expected ED or ES")


def extract_mask(volume: LabeledVolume, structure: int) -> BinaryMask:
    """Binary mask of one foreground structure (1 RV, 2 MC, 3 LV)"""
    if structure not in (1, 2, 3):
        raise DataError(f"Structure code must be 1 (RV), 2 (MC) or 3 (LV), got {structure}")
    return BinaryMask(bits=volume.labels == structure, spacing=volume.spacing)


def physical_volume_mm3(mask: BinaryMask) -> float:
    """True-voxel count times voxel volume"""
    sx, sy, sz = mask.spacing
    return mask.count * sx * sy * sz
