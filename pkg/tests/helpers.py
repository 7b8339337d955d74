"""
Volume and feature-table builders shared by the tests
"""
import numpy as np

from app.models.learning import FeatureMatrix
from app.models.volume import LabeledVolume, Structure, SubjectStudy


def disk_labels(dims, spacing, center_mm, radius_mm, code, slices=None, labels=None):
    """Paint an in-plane disk (strict radius) on the given slices"""
    nx, ny, nz = dims
    labels = np.zeros(dims, dtype=np.uint8) if labels is None else labels
    x = np.arange(nx)[:, None] * spacing[0]
    y = np.arange(ny)[None, :] * spacing[1]
    inside = np.hypot(x - center_mm[0], y - center_mm[1]) < radius_mm
    for z in (range(nz) if slices is None else slices):
        labels[:, :, z][inside] = code
    return labels


def ring_volume(dims=(48, 48, 1), spacing=(1.0, 1.0, 1.0), inner=10.0, outer=15.0, slices=None) -> LabeledVolume:
    """LV disk of radius `inner` inside an MC annulus reaching `outer`, centered in plane"""
    center = ((dims[0] - 1) * spacing[0] / 2.0, (dims[1] - 1) * spacing[1] / 2.0)
    labels = disk_labels(dims, spacing, center, outer, Structure.MC, slices)
    disk_labels(dims, spacing, center, inner, Structure.LV, slices, labels=labels)
    return LabeledVolume(labels=labels, spacing=spacing)


def box_study(subject_id="s1", class_label=0, spacing=(1.0, 1.0, 1.0)) -> SubjectStudy:
    """Small study with box-shaped RV, MC and LV at both phases; the LV shrinks at ES"""
    def phase(lv_side):
        labels = np.zeros((20, 20, 6), dtype=np.uint8)
        labels[2:8, 2:16, 1:5] = Structure.RV
        labels[8:18, 3:17, 1:5] = Structure.MC
        labels[10:10 + lv_side, 5:5 + lv_side, 1:5] = Structure.LV
        return LabeledVolume(labels=labels, spacing=spacing)

    return SubjectStudy(subject_id=subject_id, ed=phase(6), es=phase(4), class_label=class_label)


def sphere_bits(radius: float, center=None, size=None) -> np.ndarray:
    """Digital ball: voxel centers within `radius` of the center"""
    size = size or int(2 * radius + 5)
    c = (size - 1) / 2.0 if center is None else center
    grid = np.indices((size, size, size)).astype(float)
    return ((grid[0] - c) ** 2 + (grid[1] - c) ** 2 + (grid[2] - c) ** 2) <= radius ** 2


def planted_features(n_per_class=10, n_classes=3, n_shape=12, n_volumetric=4, seed=0):
    """
    Random thickness/shape and volumetric columns with one informative column
    per class: shape column c separates class c for c < n_classes - 1, and the
    first volumetric column separates the last class.
    """
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(n_classes), n_per_class)
    X = rng.normal(size=(labels.size, n_shape + n_volumetric))
    for c in range(n_classes - 1):
        X[:, c] += 4.0 * (labels == c)
    X[:, n_shape] += 4.0 * (labels == n_classes - 1)
    groups = ("shape",) * n_shape + ("volumetric",) * n_volumetric
    names = tuple(f"shape_{j}" for j in range(n_shape)) + tuple(f"vol_{j}" for j in range(n_volumetric))
    table = FeatureMatrix(X=X, feature_names=names, subject_ids=tuple(f"s{i:02d}" for i in range(labels.size)), groups=groups)
    return table, labels
