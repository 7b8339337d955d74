"""
Synthetic heart phantoms and segmentation perturbations
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy import ndimage

from app.models.phantom import CLASS_RANGES, PhantomSpec, default_spec
from app.models.volume import LabeledVolume, Structure, SubjectStudy
from app.utils.errors import DataError, GeometryError

logger = logging.getLogger(__name__)

BLOB_CLEARANCE = 4.0
# in-plane plus sign, 5 voxels
_BLOB_OFFSETS = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True)
class HeartGeometry:
    """Drawn values of one phase; radii in mm at the base slice"""
    lv_radius: float
    mc_thickness: float
    rv_radius: float
    center: Tuple[float, float]


def _draw(rng: np.random.Generator, bounds: Tuple[float, float]) -> float:
    low, high = bounds
    return float(rng.uniform(low, high))


def draw_geometry(spec: PhantomSpec) -> Tuple[HeartGeometry, HeartGeometry]:
    """ED and ES geometry; ES keeps the myocardial area of each slice"""
    rng = np.random.default_rng(spec.seed)
    lv_radius = _draw(rng, spec.lv_radius_mm)
    thickness = _draw(rng, spec.mc_thickness_mm)
    rv_radius = _draw(rng, spec.rv_radius_mm)
    lv_factor = _draw(rng, spec.lv_contraction)
    rv_factor = _draw(rng, spec.rv_contraction)
    cx, cy = spec.center_mm
    center = (
        cx + float(rng.uniform(-spec.center_jitter_mm, spec.center_jitter_mm)),
        cy + float(rng.uniform(-spec.center_jitter_mm, spec.center_jitter_mm)),
    )
    ed = HeartGeometry(lv_radius, thickness, rv_radius, center)

    es_radius = lv_radius * lv_factor
    wall_area = (lv_radius + thickness) ** 2 - lv_radius ** 2
    es_thickness = math.sqrt(es_radius ** 2 + wall_area) - es_radius
    es = HeartGeometry(es_radius, es_thickness, rv_radius * rv_factor, center)
    return ed, es


def rasterize(geometry: HeartGeometry, spec: PhantomSpec) -> LabeledVolume:
    """
    Paint one phase: LV disk inside an MC annulus with an RV crescent on the -x side.

    The RV is a disk whose center sits R_out + R_rv / 4 from the LV axis, minus
    the MC outer disk. Radii shrink linearly to apex_taper at the last slice.
    """
    nx, ny, nz = spec.dims
    sx, sy, _ = spec.spacing
    x = np.arange(nx)[:, None] * sx
    y = np.arange(ny)[None, :] * sy
    cx, cy = geometry.center
    labels = np.zeros(spec.dims, dtype=np.uint8)
    first, last = spec.slices
    span = max(last - first, 1)

    for z in range(first, last + 1):
        taper = 1.0 - (1.0 - spec.apex_taper) * (z - first) / span
        lv_radius = geometry.lv_radius * taper
        outer = lv_radius + geometry.mc_thickness
        rv_radius = geometry.rv_radius * taper
        rv_cx = cx - (outer + 0.25 * rv_radius)
        lv_distance = np.hypot(x - cx, y - cy)
        rv_distance = np.hypot(x - rv_cx, y - cy)

        plane = np.zeros((nx, ny), dtype=np.uint8)
        plane[(rv_distance < rv_radius) & (lv_distance >= outer)] = Structure.RV
        plane[(lv_distance < outer) & (lv_distance >= lv_radius)] = Structure.MC
        plane[lv_distance < lv_radius] = Structure.LV
        labels[:, :, z] = plane

    foreground = labels != Structure.BG
    edges = (foreground[0].any() or foreground[-1].any() or foreground[:, 0].any()
             or foreground[:, -1].any() or foreground[:, :, 0].any() or foreground[:, :, -1].any())
    if edges:
        raise GeometryError(
            f"Phantom of class {spec.class_name} (seed {spec.seed}) touches the volume boundary; "
            f"enlarge dims {spec.dims} or shrink the geometry"
        )
    return LabeledVolume(labels=labels, spacing=spec.spacing)


def generate_phantom(spec: PhantomSpec, subject_id: Optional[str] = None) -> SubjectStudy:
    """ED and ES label maps of one synthetic subject"""
    ed_geometry, es_geometry = draw_geometry(spec)
    return SubjectStudy(
        subject_id=subject_id or f"{spec.class_name}_{spec.seed}",
        ed=rasterize(ed_geometry, spec),
        es=rasterize(es_geometry, spec),
        class_label=spec.class_id,
        n_classes=max(len(CLASS_RANGES), spec.class_id + 1),
    )


def generate_cohort(
    n_per_class: int,
    seed: int,
    class_ids: Sequence[int] = tuple(CLASS_RANGES),
    dims: Optional[Tuple[int, int, int]] = None,
    spacing: Optional[Tuple[float, float, float]] = None,
    n_jobs: int = 1,
) -> List[SubjectStudy]:
    """n_per_class phantoms of every class, class-major order, subject seeds spawned from the root seed"""
    if n_per_class < 1:
        raise DataError(f"Need at least one phantom per class, got {n_per_class}")
    children = np.random.SeedSequence(seed).spawn(n_per_class * len(class_ids))
    jobs = []
    for c_index, class_id in enumerate(class_ids):
        for i in range(n_per_class):
            child = children[c_index * n_per_class + i]
            spec = default_spec(class_id, seed=int(child.generate_state(1)[0]), dims=dims, spacing=spacing)
            jobs.append((spec, f"sub{len(jobs):03d}"))
    studies = Parallel(n_jobs=n_jobs)(delayed(generate_phantom)(spec, subject_id) for spec, subject_id in jobs)
    logger.info(f"Generated {len(studies)} phantoms ({n_per_class} per class, seed {seed})")
    return list(studies)


def _signed_distance(mask: np.ndarray) -> np.ndarray:
    """In-plane signed distance in voxels: -0.5 on the inner boundary, +0.5 just outside"""
    sampling = (1.0, 1.0, 1e6)
    outside = ndimage.distance_transform_edt(~mask, sampling=sampling)
    inside = ndimage.distance_transform_edt(mask, sampling=sampling)
    return np.where(mask, -(inside - 0.5), outside - 0.5)


def _smooth_field(rng: np.random.Generator, shape, amplitude: float) -> np.ndarray:
    field = ndimage.gaussian_filter(rng.standard_normal(shape), sigma=(2.0, 2.0, 0.0), mode="wrap")
    peak = np.abs(field).max()
    return amplitude * field / peak if peak > 0 else field


def perturb_segmentation(
    volume: LabeledVolume,
    boundary_noise_voxels: int,
    spurious_blob_rate: float,
    seed: int,
) -> LabeledVolume:
    """
    Emulate segmentation error.

    Every structure's boundary moves in-plane by a smooth random offset of at
    most boundary_noise_voxels, painted RV, then MC, then LV. Then a Poisson
    number of 5-voxel blobs (rate per slice) is dropped at least BLOB_CLEARANCE
    voxels from the heart with a random foreground label.
    """
    if boundary_noise_voxels < 0 or spurious_blob_rate < 0:
        raise DataError("Perturbation parameters must be >= 0")
    if boundary_noise_voxels == 0 and spurious_blob_rate == 0:
        return volume

    rng = np.random.default_rng(seed)
    labels = volume.labels.copy()
    if boundary_noise_voxels > 0:
        perturbed = np.zeros_like(labels)
        for structure in (Structure.RV, Structure.MC, Structure.LV):
            mask = volume.labels == structure
            if not mask.any():
                continue
            offset = _smooth_field(rng, mask.shape, float(boundary_noise_voxels))
            perturbed[_signed_distance(mask) < offset] = structure
        labels = perturbed

    n_blobs = int(rng.poisson(spurious_blob_rate * volume.dims[2])) if spurious_blob_rate > 0 else 0
    if n_blobs:
        clearance = ndimage.distance_transform_edt(labels == Structure.BG)
        clearance[[0, -1], :, :] = 0
        clearance[:, [0, -1], :] = 0
        candidates = np.argwhere(clearance >= BLOB_CLEARANCE)
        if candidates.size == 0:
            logger.warning("No room for spurious blobs; none injected")
            n_blobs = 0
        for _ in range(n_blobs):
            i, j, z = candidates[rng.integers(len(candidates))]
            code = rng.integers(1, 4)
            for di, dj in _BLOB_OFFSETS:
                labels[i + di, j + dj, z] = code
        logger.debug(f"Injected {n_blobs} spurious blobs")

    return volume.with_labels(labels)
