"""
Unit tests for phantom generation and segmentation perturbation
"""
import numpy as np
import pytest

from app.models.phantom import default_spec
from app.models.volume import BinaryMask
from app.services.phantom import generate_cohort, generate_phantom, perturb_segmentation
from app.services.postprocess import connected_components, keep_largest_component
from app.services.seg_metrics import score_volumes
from app.services.thickness_features import thickness_profile, thickness_statistic
from app.services.volumetric_features import volumetric_features
from app.utils.errors import DataError, GeometryError


@pytest.fixture(scope="module")
def normal_study():
    return generate_phantom(default_spec(0, seed=11))


def test_phantom_is_deterministic(normal_study):
    """Test one spec and seed always give the same volumes"""
    again = generate_phantom(default_spec(0, seed=11))
    assert again.ed == normal_study.ed
    assert again.es == normal_study.es
    assert generate_phantom(default_spec(0, seed=12)).ed != normal_study.ed


def test_normal_ejection_fraction(normal_study):
    """Test a normal phantom ejects between 50% and 70% of its LV"""
    assert 0.5 <= volumetric_features(normal_study)["LV_EF"] <= 0.7
    assert normal_study.class_label == 0


def test_hypertrophic_wall_exceeds_15mm(normal_study):
    """Test a hypertrophic wall has samples thicker than 15 mm and a normal one fewer"""
    hypertrophic = generate_phantom(default_spec(2, seed=4))
    thick = thickness_statistic(thickness_profile(hypertrophic.ed).thicknesses, "count_gt", 15)
    normal = thickness_statistic(thickness_profile(normal_study.ed).thicknesses, "count_gt", 15)
    assert thick > 0
    assert thick > normal


def test_heart_is_one_component(normal_study):
    """Test the phantom foreground is connected at both phases"""
    for volume in (normal_study.ed, normal_study.es):
        foreground = BinaryMask(bits=volume.foreground(), spacing=volume.spacing)
        assert connected_components(foreground).n_components == 1


def test_geometry_must_fit():
    """Test a dilated heart in a tiny grid is rejected"""
    with pytest.raises(GeometryError):
        generate_phantom(default_spec(1, seed=0, dims=(16, 16, 5)))


def test_cohort_order_and_determinism():
    """Test class-major order, sequential ids and seed reproducibility"""
    cohort = generate_cohort(2, seed=3, class_ids=(0, 2))
    assert [s.subject_id for s in cohort] == ["sub000", "sub001", "sub002", "sub003"]
    assert [s.class_label for s in cohort] == [0, 0, 2, 2]
    again = generate_cohort(2, seed=3, class_ids=(0, 2))
    assert all(a.ed == b.ed and a.es == b.es for a, b in zip(cohort, again))
    assert cohort[0].ed != cohort[1].ed


def test_dilated_ejects_less_than_normal():
    """Test the dilated class has a clearly lower mean LV ejection fraction"""
    cohort = generate_cohort(3, seed=8, class_ids=(0, 1))
    ef = np.array([volumetric_features(s)["LV_EF"] for s in cohort])
    assert ef[3:].mean() < ef[:3].mean() - 0.15


def test_no_perturbation_is_identity(normal_study):
    """Test zero noise and zero blob rate return the volume unchanged"""
    assert perturb_segmentation(normal_study.ed, 0, 0.0, seed=1) == normal_study.ed


def test_negative_perturbation_rejected(normal_study):
    with pytest.raises(DataError):
        perturb_segmentation(normal_study.ed, -1, 0.0, seed=1)


def test_boundary_noise_keeps_dice_high(normal_study):
    """Test one voxel of boundary noise keeps every structure's Dice at 0.85 or more"""
    noisy = perturb_segmentation(normal_study.ed, 1, 0.0, seed=5)
    assert noisy != normal_study.ed
    assert noisy == perturb_segmentation(normal_study.ed, 1, 0.0, seed=5)
    for score in score_volumes(noisy, normal_study.ed).values():
        assert score.dice >= 0.85


def test_blobs_removed_by_largest_component(normal_study):
    """Test spurious blobs sit apart from the heart and post-processing removes them all"""
    blobby = perturb_segmentation(normal_study.ed, 0, 2.0, seed=9)
    foreground = BinaryMask(bits=blobby.foreground(), spacing=blobby.spacing)
    assert connected_components(foreground).n_components > 1
    assert keep_largest_component(blobby) == normal_study.ed
