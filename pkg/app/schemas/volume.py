"""
Pydantic schemas for CQV1 volume headers and study manifests
"""
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.models.volume import LABEL_CODES


class VolumeHeader(BaseModel):
    """JSON header of a CQV1 volume; the raw payload sits in a sibling file"""
    model_config = ConfigDict(extra="forbid")

    magic: str = Field(..., description="Format tag, always CQV1")
    dims: List[int] = Field(..., min_length=3, max_length=3, description="Voxel counts (nx, ny, nz)")
    spacing_mm: List[float] = Field(..., min_length=3, max_length=3, description="mm per voxel (sx, sy, sz)")
    labels: Dict[str, int] = Field(default_factory=lambda: dict(LABEL_CODES), description="Structure name to code")

    @field_validator("magic")
    @classmethod
    def check_magic(cls, value: str) -> str:
        if value != "CQV1":
            raise ValueError(f"unexpected magic {value!r}")
        return value

    @field_validator("dims")
    @classmethod
    def check_dims(cls, value: List[int]) -> List[int]:
        if any(d <= 0 for d in value):
            raise ValueError("dims must be positive")
        return value

    @field_validator("spacing_mm")
    @classmethod
    def check_spacing(cls, value: List[float]) -> List[float]:
        if any(not (s > 0 and s != float("inf")) for s in value):
            raise ValueError("spacing must be positive and finite")
        return value

    @field_validator("labels")
    @classmethod
    def check_labels(cls, value: Dict[str, int]) -> Dict[str, int]:
        if value != LABEL_CODES:
            raise ValueError(f"label mapping {value} differs from {LABEL_CODES}")
        return value


class StudyRecord(BaseModel):
    """One row of a study manifest CSV"""
    subject_id: str = Field(..., min_length=1)
    ed_path: str
    es_path: str
    class_label: Optional[int] = Field(default=None, ge=0)
