"""
Shape descriptors of a binary structure: mesh surface area, sphericity and
compactness, maximum diameters and principal-axis lengths
"""
import logging
import math
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from scipy.spatial.distance import pdist
from skimage.measure import marching_cubes, mesh_surface_area

from app.models.features import FeatureGroup, FeatureSpec, FeatureVector, PrincipalAxes
from app.models.volume import BinaryMask, physical_volume_mm3
from app.utils.errors import DataError, DegenerateStructureError, EmptyStructureError

logger = logging.getLogger(__name__)

SHAPE_FEATURES = (
    "surface_area",
    "surface_volume_ratio",
    "sphericity",
    "compactness1",
    "compactness2",
    "spherical_disproportion",
    "max_3d_diameter",
    "max_2d_diameter_slice",
    "max_2d_diameter_column",
    "max_2d_diameter_row",
    "major_axis",
    "minor_axis",
    "least_axis",
    "elongation",
    "flatness",
)

# (structure, phase, features left out)
SHAPE_TARGETS = (
    ("LV", "ED", ()),
    ("LV", "ES", ()),
    ("RV", "ED", ()),
    ("RV", "ES", ("compactness2",)),
)


def surface_area_mm2(mask: BinaryMask) -> float:
    """Area of the iso-surface at level 0.5 of the zero-padded binary field"""
    if mask.is_empty():
        raise EmptyStructureError("mask", "surface area")
    field = np.pad(mask.bits.astype(np.float32), pad_width=1, mode="constant", constant_values=0.0)
    vertices, faces, _, _ = marching_cubes(field, level=0.5, spacing=mask.spacing)
    return float(mesh_surface_area(vertices, faces))


def principal_axis_lengths(mask: BinaryMask) -> Tuple[PrincipalAxes, Tuple[float, float, float]]:
    """Eigenvalues of the population covariance of voxel centers and the 4*sqrt(lambda) axis lengths"""
    if mask.count < 2:
        raise DegenerateStructureError(f"Principal axes need at least 2 voxels, got {mask.count}")
    coordinates = mask.coordinates_mm()
    covariance = np.cov(coordinates, rowvar=False, bias=True)
    eigenvalues = np.clip(np.linalg.eigvalsh(covariance)[::-1], 0.0, None)
    axes = PrincipalAxes(
        lambda_major=float(eigenvalues[0]),
        lambda_minor=float(eigenvalues[1]),
        lambda_least=float(eigenvalues[2]),
    )
    return axes, (axes.major_axis, axes.minor_axis, axes.least_axis)


def _line_extremes(bits: np.ndarray) -> np.ndarray:
    """Voxels that are first or last along every axis-parallel line through them"""
    keep = bits.copy()
    for axis in range(bits.ndim):
        forward = np.cumsum(bits, axis=axis)
        backward = np.flip(np.cumsum(np.flip(bits, axis=axis), axis=axis), axis=axis)
        keep &= (forward == 1) | (backward == 1)
    return keep


def _max_pairwise(points: np.ndarray) -> float:
    if points.shape[0] < 2:
        return 0.0
    if points.shape[0] > points.shape[1] + 1:
        try:
            points = points[ConvexHull(points).vertices]
        except QhullError:
            # flat or collinear sets
            pass
    return float(pdist(points).max())


def _max_in_planes(bits: np.ndarray, spacing: Sequence[float], axis: int) -> float:
    """Largest distance between voxels sharing an index along the given axis"""
    plane_axes = [a for a in range(3) if a != axis]
    plane_spacing = np.asarray(spacing)[plane_axes]
    best = 0.0
    for index in range(bits.shape[axis]):
        plane = np.take(bits, index, axis=axis)
        if np.count_nonzero(plane) < 2:
            continue
        points = np.argwhere(_line_extremes(plane)).astype(float) * plane_spacing
        best = max(best, _max_pairwise(points))
    return best


def max_diameters(mask: BinaryMask) -> Tuple[float, float, float, float]:
    """
    Maximum pairwise distance between voxel centers (d3) and within slice (same z),
    column (same x) and row (same y) planes.

    A farthest pair only involves voxels at the ends of their axis-parallel lines,
    so candidates are reduced to those before the exhaustive scan.
    """
    if mask.count < 2:
        return 0.0, 0.0, 0.0, 0.0
    bits = mask.bits
    points = np.argwhere(_line_extremes(bits)).astype(float) * np.asarray(mask.spacing)
    d3 = _max_pairwise(points)
    d_slice = _max_in_planes(bits, mask.spacing, axis=2)
    d_col = _max_in_planes(bits, mask.spacing, axis=0)
    d_row = _max_in_planes(bits, mask.spacing, axis=1)
    return d3, d_slice, d_col, d_row


def measure_shape(mask: BinaryMask) -> Dict[str, float]:
    """All fifteen shape descriptors of one mask, keyed by descriptor name"""
    if mask.is_empty():
        raise EmptyStructureError("mask", "shape features")
    volume = physical_volume_mm3(mask)
    area = surface_area_mm2(mask)
    axes, (major, minor, least) = principal_axis_lengths(mask)
    d3, d_slice, d_col, d_row = max_diameters(mask)
    radius = (3.0 * volume / (4.0 * math.pi)) ** (1.0 / 3.0)

    return {
        "surface_area": area,
        "surface_volume_ratio": area / volume,
        "sphericity": math.pi ** (1.0 / 3.0) * (6.0 * volume) ** (2.0 / 3.0) / area,
        "compactness1": volume / (math.sqrt(math.pi) * area ** 1.5),
        "compactness2": 36.0 * math.pi * volume ** 2 / area ** 3,
        "spherical_disproportion": area / (4.0 * math.pi * radius ** 2),
        "max_3d_diameter": d3,
        "max_2d_diameter_slice": d_slice,
        "max_2d_diameter_column": d_col,
        "max_2d_diameter_row": d_row,
        "major_axis": major,
        "minor_axis": minor,
        "least_axis": least,
        "elongation": math.sqrt(axes.lambda_minor / axes.lambda_major),
        "flatness": math.sqrt(axes.lambda_least / axes.lambda_major),
    }


def shape_features(mask: BinaryMask) -> FeatureVector:
    """The fifteen shape features of one mask, in canonical order"""
    values = measure_shape(mask)
    return FeatureVector.from_dict({name: values[name] for name in SHAPE_FEATURES})


def shape_specs() -> List[FeatureSpec]:
    """Shape entries: 15 for LV at ED and ES and RV at ED, 14 for RV at ES"""
    specs = []
    for structure, phase, omitted in SHAPE_TARGETS:
        for feature in SHAPE_FEATURES:
            if feature in omitted:
                continue
            specs.append(FeatureSpec(
                name=f"{structure}_{phase}_{feature}",
                group=FeatureGroup.SHAPE,
                structure=structure,
                phase=phase,
                params={"feature": feature},
            ))
    return specs


def shape_value(measurements: Dict[str, float], spec: FeatureSpec) -> float:
    """Evaluate one shape manifest entry from precomputed measurements"""
    feature = spec.params.get("feature")
    if feature not in measurements:
        raise DataError(f"{spec.name}: unknown shape feature {feature!r}")
    return measurements[feature]
