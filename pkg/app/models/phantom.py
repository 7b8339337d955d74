"""
Phantom specifications: per-class geometry ranges for synthetic hearts
"""
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from app.utils.errors import DataError

Range = Tuple[float, float]

CLASS_NAMES = ("normal", "dilated", "hypertrophic", "infarct", "abnormal_rv")

# Contraction factors are ES/ED radius ratios, so an ejection fraction is about 1 - factor^2.
CLASS_RANGES: Dict[int, Dict[str, Range]] = {
    0: {"lv_radius_mm": (19.0, 21.0), "mc_thickness_mm": (8.0, 9.0), "rv_radius_mm": (22.0, 26.0),
        "lv_contraction": (0.62, 0.65), "rv_contraction": (0.66, 0.70)},
    1: {"lv_radius_mm": (27.0, 29.0), "mc_thickness_mm": (7.0, 8.0), "rv_radius_mm": (22.0, 26.0),
        "lv_contraction": (0.85, 0.88), "rv_contraction": (0.66, 0.70)},
    2: {"lv_radius_mm": (15.0, 17.0), "mc_thickness_mm": (17.0, 19.0), "rv_radius_mm": (22.0, 26.0),
        "lv_contraction": (0.53, 0.56), "rv_contraction": (0.66, 0.70)},
    3: {"lv_radius_mm": (20.0, 22.0), "mc_thickness_mm": (8.0, 9.0), "rv_radius_mm": (22.0, 26.0),
        "lv_contraction": (0.82, 0.85), "rv_contraction": (0.66, 0.70)},
    4: {"lv_radius_mm": (19.0, 21.0), "mc_thickness_mm": (8.0, 9.0), "rv_radius_mm": (32.0, 36.0),
        "lv_contraction": (0.62, 0.65), "rv_contraction": (0.88, 0.90)},
}


@dataclass(frozen=True)
class PhantomSpec:
    """Geometry ranges of one phantom class; each subject draws its values from the seed"""
    class_id: int
    lv_radius_mm: Range
    mc_thickness_mm: Range
    rv_radius_mm: Range
    lv_contraction: Range
    rv_contraction: Range
    dims: Tuple[int, int, int] = (64, 64, 10)
    spacing: Tuple[float, float, float] = (2.0, 2.0, 8.0)
    slices: Tuple[int, int] = (1, 8)
    lv_center_mm: Optional[Tuple[float, float]] = None
    center_jitter_mm: float = 2.0
    apex_taper: float = 0.7
    seed: int = 0

    def __post_init__(self):
        for name in ("lv_radius_mm", "mc_thickness_mm", "rv_radius_mm"):
            low, high = getattr(self, name)
            if not 0 < low <= high:
                raise DataError(f"{name} must be a positive range, got {(low, high)}")
        for name in ("lv_contraction", "rv_contraction"):
            low, high = getattr(self, name)
            if not 0 < low <= high <= 1.5:
                raise DataError(f"{name} must lie in (0, 1.5], got {(low, high)}")
        if any(d <= 0 for d in self.dims) or any(s <= 0 for s in self.spacing):
            raise DataError("Phantom dims and spacing must be positive")
        first, last = self.slices
        if not 0 <= first <= last < self.dims[2]:
            raise DataError(f"Slice range {self.slices} outside 0..{self.dims[2] - 1}")
        if not 0 < self.apex_taper <= 1:
            raise DataError(f"Apex taper must lie in (0, 1], got {self.apex_taper}")

    @property
    def center_mm(self) -> Tuple[float, float]:
        """LV axis position; by default right of center so the RV fits on the left"""
        if self.lv_center_mm is not None:
            return self.lv_center_mm
        return 0.65 * (self.dims[0] - 1) * self.spacing[0], 0.5 * (self.dims[1] - 1) * self.spacing[1]

    @property
    def class_name(self) -> str:
        return CLASS_NAMES[self.class_id] if self.class_id < len(CLASS_NAMES) else str(self.class_id)


def default_spec(
    class_id: int,
    seed: int = 0,
    dims: Optional[Tuple[int, int, int]] = None,
    spacing: Optional[Tuple[float, float, float]] = None,
) -> PhantomSpec:
    """Spec of one of the five built-in classes"""
    if class_id not in CLASS_RANGES:
        raise DataError(f"No built-in phantom class {class_id}; expected 0..{len(CLASS_RANGES) - 1}")
    extra = {}
    if dims is not None:
        extra["dims"] = tuple(dims)
        extra["slices"] = (1, dims[2] - 2) if dims[2] >= 3 else (0, dims[2] - 1)
    if spacing is not None:
        extra["spacing"] = tuple(spacing)
    return PhantomSpec(class_id=class_id, seed=seed, **CLASS_RANGES[class_id], **extra)
