"""
Pydantic schemas for the JSON reports written by the pipeline
"""
from typing import Any, Dict, List

import numpy as np
from pydantic import BaseModel, Field

from app.models.learning import SelectionReport, TwoStageReport


class StageDocument(BaseModel):
    """One selection stage; indices refer to columns of the full feature table"""
    candidates: List[int]
    frequencies: List[float]
    selected: List[int]
    selected_names: List[str]

    @classmethod
    def from_stage(cls, stage: SelectionReport, feature_names) -> "StageDocument":
        return cls(
            candidates=[int(i) for i in stage.candidates],
            frequencies=[float(f) for f in stage.frequencies],
            selected=[int(i) for i in stage.selected],
            selected_names=[feature_names[i] for i in stage.selected],
        )


class SelectionDocument(BaseModel):
    """Serialized two-stage selection"""
    method: str
    seed: int
    stage1: StageDocument
    stage2: StageDocument
    params: Dict[str, Any] = Field(default_factory=dict)
    config: Dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_report(cls, report: TwoStageReport, config: Dict[str, Any] = None) -> "SelectionDocument":
        return cls(
            method=report.method,
            seed=report.seed,
            stage1=StageDocument.from_stage(report.stage1, report.feature_names),
            stage2=StageDocument.from_stage(report.stage2, report.feature_names),
            params=report.params,
            config=config or {},
        )


class FoldResult(BaseModel):
    """Held-out accuracy of one (repeat, fold) job"""
    repeat: int
    fold: int
    accuracy: float
    n_test: int
    selected_features: List[str]


class CvReport(BaseModel):
    """Repeated k-fold cross-validation summary"""
    mode: str = Field(..., description="'nested selection' or 'non-nested selection'")
    method: str
    k: int
    n_repeats: int
    seed: int
    class_names: List[str]
    folds: List[FoldResult]
    mean: float
    std: float
    confusion: List[List[int]] = Field(..., description="Rows true class, columns predicted; summed over repeats")
    config: Dict[str, Any] = Field(default_factory=dict)

    @property
    def accuracies(self) -> np.ndarray:
        return np.array([f.accuracy for f in self.folds])

    def summary_line(self) -> str:
        return f"{self.method} ({self.mode}): {100 * self.mean:.2f}% ± {100 * self.std:.2f}%"


class GridPoint(BaseModel):
    params: Dict[str, Any]
    mean: float
    std: float


class GridSearchResult(BaseModel):
    """Every evaluated grid point and the winner"""
    points: List[GridPoint]
    best_index: int

    @property
    def best_params(self) -> Dict[str, Any]:
        return self.points[self.best_index].params


class ComparisonCell(BaseModel):
    source: str
    method: str
    mean: float
    std: float


class AccuracyDrop(BaseModel):
    source: str
    reference: str
    method: str
    drop: float = Field(..., description="Reference mean accuracy minus this source's mean accuracy")


class ComparisonReport(BaseModel):
    """Sources x selection methods accuracy table"""
    sources: List[str]
    methods: List[str]
    cells: List[ComparisonCell]
    drops: List[AccuracyDrop]
    config: Dict[str, Any] = Field(default_factory=dict)

    def cell(self, source: str, method: str) -> ComparisonCell:
        for cell in self.cells:
            if cell.source == source and cell.method == method:
                return cell
        raise KeyError((source, method))
