"""
Pydantic schemas for the per-run pipeline configuration
"""
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.config import settings
from app.utils.errors import MissingFileError, UsageError


class SelectionMethod(str, Enum):
    """L1 selection methods usable inside one-vs-rest aggregation"""
    LASSO = "lasso"
    L1_LOGISTIC = "l1_logistic"
    RANDOMIZED = "randomized"


class SelectionConfig(BaseModel):
    """Two-stage selection parameters"""
    model_config = ConfigDict(extra="forbid")

    method: SelectionMethod = Field(default=SelectionMethod.RANDOMIZED, description="Selection method")
    lambda_grid: Optional[List[float]] = Field(default=None, description="Explicit penalty grid; derived from data when unset")
    n_lambdas: int = Field(default=20, ge=1, description="Grid size when derived from data")
    lambda_min_ratio: float = Field(default=1e-4, gt=0, le=1, description="Smallest grid point as a fraction of lambda_max")
    n_resamples: int = Field(default=50, ge=1, description="Resamples for randomized logistic")
    subsample_fraction: float = Field(default=0.75, gt=0, le=1)
    weakness: float = Field(default=0.5, gt=0, le=1)
    stage1_count: int = Field(default=30, ge=1, description="Thickness+shape columns kept by stage 1")
    stage2_count: int = Field(default=20, ge=1, description="Columns kept by stage 2")

    @field_validator("lambda_grid")
    @classmethod
    def check_grid(cls, value: Optional[List[float]]) -> Optional[List[float]]:
        if value is not None and any(not (v >= 0 and v != float("inf")) for v in value):
            raise ValueError("lambda grid values must be finite and >= 0")
        return value


class ClassifierConfig(BaseModel):
    """Base classifier and voting parameters"""
    model_config = ConfigDict(extra="forbid")

    lr_l2: float = Field(default=1e-4, ge=0)
    mlp_epochs: int = Field(default=2000, ge=1)
    mlp_learning_rate: float = Field(default=0.1, gt=0)
    mlp_momentum: float = Field(default=0.9, ge=0, lt=1)
    mlp_l2: float = Field(default=1e-4, ge=0)
    svm_nu: float = Field(default=0.3, gt=0, le=1)
    svm_gamma: Optional[float] = Field(default=None, gt=0, description="Sigmoid kernel gamma; 1/d when unset")
    svm_coef0: float = Field(default=0.0)
    weights: List[float] = Field(default_factory=lambda: [1.0, 1.0, 2.0], min_length=3, max_length=3,
                                 description="Soft-vote weights for LR, MLP, Nu-SVM")

    @field_validator("weights")
    @classmethod
    def check_weights(cls, value: List[float]) -> List[float]:
        if any(w <= 0 for w in value):
            raise ValueError("voting weights must be positive")
        return value


class CvConfig(BaseModel):
    """Cross-validation and grid-search parameters"""
    model_config = ConfigDict(extra="forbid")

    k: int = Field(default=8, ge=2)
    n_repeats: int = Field(default=8, ge=1)
    stratified: bool = True
    paper_order: bool = Field(default=False, description="Select once on all subjects before the folds")
    param_grid: Optional[Dict[str, List[Any]]] = Field(
        default=None, description="Parameter grid for grid search, keyed by ClassifierConfig or SelectionConfig field"
    )

    @field_validator("param_grid")
    @classmethod
    def check_grid_keys(cls, value: Optional[Dict[str, List[Any]]]) -> Optional[Dict[str, List[Any]]]:
        if value is not None:
            unknown = sorted(set(value) - set(ClassifierConfig.model_fields) - set(SelectionConfig.model_fields))
            if unknown:
                raise ValueError(f"unknown parameters in grid: {unknown}")
        return value


class PipelineConfig(BaseModel):
    """Everything one pipeline run needs; loaded from a single JSON file"""
    model_config = ConfigDict(extra="forbid")

    study_manifest: Optional[str] = Field(default=None, description="Study manifest CSV")
    feature_table: Optional[str] = Field(default=None, description="Feature table CSV; extracted from studies when unset")
    feature_manifest: Optional[str] = Field(default=None, description="Alternative feature manifest CSV")
    output_dir: str = Field(default="out")
    seed: int = Field(default_factory=lambda: settings.DEFAULT_SEED)
    connectivity: int = Field(default_factory=lambda: settings.DEFAULT_CONNECTIVITY)
    angular_step: float = Field(default_factory=lambda: settings.THICKNESS_ANGULAR_STEP, gt=0)
    n_classes: int = Field(default_factory=lambda: settings.N_CLASSES, ge=2)
    class_names: Optional[List[str]] = None
    n_jobs: int = Field(default_factory=lambda: settings.N_JOBS)
    selection: SelectionConfig = Field(default_factory=SelectionConfig)
    classifier: ClassifierConfig = Field(default_factory=ClassifierConfig)
    cv: CvConfig = Field(default_factory=CvConfig)

    @field_validator("connectivity")
    @classmethod
    def check_connectivity(cls, value: int) -> int:
        if value not in (6, 26):
            raise ValueError("connectivity must be 6 or 26")
        return value

    @model_validator(mode="after")
    def check_class_names(self) -> "PipelineConfig":
        if self.class_names is not None and len(self.class_names) != self.n_classes:
            raise ValueError(f"{len(self.class_names)} class names for {self.n_classes} classes")
        return self

    def resolved_class_names(self) -> List[str]:
        return list(self.class_names) if self.class_names else [str(k) for k in range(self.n_classes)]

    def with_overrides(self, **overrides) -> "PipelineConfig":
        """Copy with command-line overrides applied; None values are ignored"""
        data = self.model_dump()
        for key, value in overrides.items():
            if value is None:
                continue
            if key == "paper_order":
                data["cv"]["paper_order"] = value
            else:
                data[key] = value
        return parse_config(data)


def parse_config(data: Dict[str, Any]) -> PipelineConfig:
    try:
        return PipelineConfig.model_validate(data)
    except ValidationError as e:
        raise UsageError(f"Invalid pipeline config: {e}")


def load_config(path: Optional[Union[str, Path]]) -> PipelineConfig:
    """Read a JSON config file; no path means all defaults"""
    if path is None:
        return PipelineConfig()
    config_path = Path(path)
    if not config_path.is_file():
        raise MissingFileError(str(config_path))
    try:
        data = json.loads(config_path.read_text())
    except json.JSONDecodeError as e:
        raise UsageError(f"Config {config_path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise UsageError(f"Config {config_path} must hold a JSON object")
    return parse_config(data)
