"""
Feature vectors, thickness profiles, principal axes and the feature manifest
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.utils.errors import DataError


class FeatureGroup(str, Enum):
    """Feature families of the manifest"""
    VOLUMETRIC = "volumetric"
    THICKNESS = "thickness"
    SHAPE = "shape"


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Named scalar features in a fixed order"""
    names: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        names = tuple(self.names)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if len(names) != values.size:
            raise DataError(f"{len(names)} feature names for {values.size} values")
        if len(set(names)) != len(names):
            duplicates = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"Duplicate feature names {duplicates}")
        if not np.all(np.isfinite(values)):
            bad = [n for n, v in zip(names, values) if not np.isfinite(v)]
            raise DataError(f"Non-finite feature values for {bad}")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_dict(cls, items: Dict[str, float]) -> "FeatureVector":
        return cls(names=tuple(items), values=np.array(list(items.values()), dtype=float))

    def as_dict(self) -> Dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values)}

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def __len__(self) -> int:
        return len(self.names)


@dataclass(frozen=True, eq=False)
class ThicknessProfile:
    """Myocardial thickness samples as (slice index, angle degrees, thickness mm) rows"""
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float).reshape(-1, 3)
        if samples.size and (np.any(samples[:, 2] < 0) or np.any(samples[:, 1] < 0) or np.any(samples[:, 1] >= 360)):
            raise DataError("Thickness samples need thickness >= 0 and angle in [0, 360)")
        object.__setattr__(self, "samples", samples)

    @property
    def thicknesses(self) -> np.ndarray:
        return self.samples[:, 2]

    def __len__(self) -> int:
        return int(self.samples.shape[0])


@dataclass(frozen=True)
class PrincipalAxes:
    """Covariance eigenvalues (mm^2, descending) and derived axis lengths (mm)"""
    lambda_major: float
    lambda_minor: float
    lambda_least: float

    def __post_init__(self):
        if not self.lambda_major >= self.lambda_minor >= self.lambda_least >= 0:
            raise DataError(
                f"Eigenvalues must be descending and non-negative, got "
                f"{self.lambda_major}, {self.lambda_minor}, {self.lambda_least}"
            )

    @property
    def major_axis(self) -> float:
        return 4.0 * float(np.sqrt(self.lambda_major))

    @property
    def minor_axis(self) -> float:
        return 4.0 * float(np.sqrt(self.lambda_minor))

    @property
    def least_axis(self) -> float:
        return 4.0 * float(np.sqrt(self.lambda_least))


@dataclass(frozen=True)
class FeatureSpec:
    """One manifest entry; params say how the extractor computes it"""
    name: str
    group: FeatureGroup
    structure: str
    phase: str
    params: Dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class FeatureManifest:
    """Ordered list of features to extract"""
    entries: Tuple[FeatureSpec, ...]

    def __post_init__(self):
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise DataError("Feature manifest has duplicate names")

    @property
    def names(self) -> List[str]:
        return [e.name for e in self.entries]

    @property
    def groups(self) -> List[FeatureGroup]:
        return [e.group for e in self.entries]

    def group_counts(self) -> Dict[str, int]:
        counts = {g.value: 0 for g in FeatureGroup}
        for entry in self.entries:
            counts[entry.group.value] += 1
        return counts

    def select(self, names: Sequence[str]) -> "FeatureManifest":
        wanted = set(names)
        return FeatureManifest(entries=tuple(e for e in self.entries if e.name in wanted))

    def __len__(self) -> int:
        return len(self.entries)

    def find(self, name: str) -> Optional[FeatureSpec]:
        for entry in self.entries:
            if entry.name == name:
                return entry
        return None
