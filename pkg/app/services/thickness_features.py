"""
Myocardial thickness by polar ray casting per short-axis slice
"""
import logging
import math
from typing import Dict, Iterable, List, Optional

import numpy as np

from app.models.features import FeatureGroup, FeatureSpec, FeatureVector, ThicknessProfile
from app.models.volume import LabeledVolume, Structure
from app.utils.errors import DataError, EmptyStructureError, UsageError

logger = logging.getLogger(__name__)

ORDER_STATISTICS = ("max", "min", "mean", "median", "std", "variance")
DEFAULT_THRESHOLDS = tuple(range(10, 31))


def _angles(angular_step: float) -> np.ndarray:
    if angular_step <= 0:
        raise UsageError(f"Angular step must be positive, got {angular_step}")
    n_angles = 360.0 / angular_step
    if abs(n_angles - round(n_angles)) > 1e-9:
        raise UsageError(f"Angular step {angular_step} does not divide 360")
    return np.arange(int(round(n_angles))) * angular_step


def _first_run_lengths(hits: np.ndarray) -> np.ndarray:
    """Length of the first contiguous run of True in every row (0 for rows without any)"""
    n_steps = hits.shape[1]
    positions = np.arange(n_steps)[None, :]
    start = np.argmax(hits, axis=1)
    gaps = ~hits & (positions >= start[:, None])
    end = np.where(gaps.any(axis=1), np.argmax(gaps, axis=1), n_steps)
    return np.where(hits.any(axis=1), end - start, 0)


def _slice_center(lv: np.ndarray, mc: np.ndarray, spacing) -> np.ndarray:
    region = lv if lv.any() else mc
    ij = np.argwhere(region).astype(float)
    return ij.mean(axis=0) * np.asarray(spacing[:2])


def thickness_profile(volume: LabeledVolume, angular_step: float = 1.0) -> ThicknessProfile:
    """
    Cast rays from the LV blood-pool centroid of every slice holding myocardium.

    Each ray is sampled at half the smallest in-plane spacing; a sample takes the
    label of its nearest voxel. The thickness at an angle is the length of the
    first myocardial run met along the ray, 0 when the ray never meets it.
    """
    angles = _angles(angular_step)
    mc_all = volume.labels == Structure.MC
    if not mc_all.any():
        raise EmptyStructureError("MC", "thickness profile")

    sx, sy = volume.spacing[0], volume.spacing[1]
    nx, ny, nz = volume.dims
    step = min(sx, sy) / 2.0
    n_steps = int(math.ceil(math.hypot(nx * sx, ny * sy) / step)) + 1
    radians = np.deg2rad(angles)
    offsets = np.arange(n_steps) * step
    dx = np.cos(radians)[:, None] * offsets[None, :]
    dy = np.sin(radians)[:, None] * offsets[None, :]

    rows = []
    for z in range(nz):
        mc = mc_all[:, :, z]
        if not mc.any():
            continue
        lv = volume.labels[:, :, z] == Structure.LV
        cx, cy = _slice_center(lv, mc, volume.spacing)
        i = np.rint((cx + dx) / sx).astype(np.int64)
        j = np.rint((cy + dy) / sy).astype(np.int64)
        inside = (i >= 0) & (i < nx) & (j >= 0) & (j < ny)
        hits = np.zeros(i.shape, dtype=bool)
        hits[inside] = mc[i[inside], j[inside]]
        thickness = _first_run_lengths(hits) * step
        rows.append(np.column_stack([np.full(angles.size, z, dtype=float), angles, thickness]))

    samples = np.vstack(rows)
    logger.debug(f"Thickness profile: {len(rows)} slices, {samples.shape[0]} samples")
    return ThicknessProfile(samples=samples)


def thickness_statistic(thicknesses: np.ndarray, stat: str, threshold: Optional[float] = None) -> float:
    """One statistic of a thickness sample; variance and std use the population convention"""
    values = np.asarray(thicknesses, dtype=float)
    if values.size == 0:
        raise EmptyStructureError("MC", "empty thickness profile")
    if stat == "count_gt":
        if threshold is None:
            raise DataError("Thickness count needs a threshold")
        return float(np.count_nonzero(values > threshold))
    if stat == "max":
        return float(values.max())
    if stat == "min":
        return float(values.min())
    if stat == "mean":
        return float(values.mean())
    if stat == "median":
        return float(np.median(values))
    if stat == "std":
        return float(values.std())
    if stat == "variance":
        return float(values.var())
    raise DataError(f"Unknown thickness statistic {stat!r}")


def thickness_features(profile: ThicknessProfile, thresholds: Iterable[int] = DEFAULT_THRESHOLDS) -> FeatureVector:
    """Six order statistics plus the count of samples strictly above each threshold"""
    values: Dict[str, float] = {}
    for stat in ORDER_STATISTICS:
        values[f"thickness_{stat}"] = thickness_statistic(profile.thicknesses, stat)
    for threshold in thresholds:
        values[f"thickness_count_gt_{threshold}"] = thickness_statistic(profile.thicknesses, "count_gt", threshold)
    return FeatureVector.from_dict(values)


def thickness_specs(phases=("ED", "ES")) -> List[FeatureSpec]:
    """27 thickness entries per phase"""
    specs = []
    for phase in phases:
        for stat in ORDER_STATISTICS:
            specs.append(FeatureSpec(
                name=f"MC_{phase}_thickness_{stat}",
                group=FeatureGroup.THICKNESS,
                structure="MC",
                phase=phase,
                params={"stat": stat},
            ))
        for threshold in DEFAULT_THRESHOLDS:
            specs.append(FeatureSpec(
                name=f"MC_{phase}_thickness_count_gt_{threshold}",
                group=FeatureGroup.THICKNESS,
                structure="MC",
                phase=phase,
                params={"stat": "count_gt", "threshold": str(threshold)},
            ))
    return specs


def thickness_value(profile: ThicknessProfile, spec: FeatureSpec) -> float:
    """Evaluate one thickness manifest entry"""
    threshold = spec.params.get("threshold")
    return thickness_statistic(
        profile.thicknesses,
        spec.params.get("stat", "mean"),
        float(threshold) if threshold is not None else None,
    )
