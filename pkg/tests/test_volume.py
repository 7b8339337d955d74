"""
Unit tests for labeled volumes and CQV1 volume files
"""
import json

import numpy as np
import pytest

from app.models.volume import BinaryMask, LabeledVolume, Structure, SubjectStudy, extract_mask, physical_volume_mm3
from app.repositories.study_repository import StudyRepository
from app.repositories.volume_repository import VolumeRepository, raw_path_for
from app.schemas.volume import StudyRecord
from app.utils.errors import DataError, InvalidLabelError, MissingFileError, VolumeFormatError
from tests.helpers import box_study


def test_flat_layout_is_x_fastest():
    """Test the flat payload order: x fastest, then y, then z"""
    flat = np.zeros(2 * 3 * 4, dtype=np.uint8)
    flat[1] = 3        # (1, 0, 0)
    flat[2] = 2        # (0, 1, 0)
    flat[2 * 3] = 1    # (0, 0, 1)
    volume = LabeledVolume.from_flat(flat, (2, 3, 4), (1.0, 1.0, 1.0))
    assert volume.labels[1, 0, 0] == 3
    assert volume.labels[0, 1, 0] == 2
    assert volume.labels[0, 0, 1] == 1
    np.testing.assert_array_equal(volume.flat_labels(), flat)


def test_invalid_label_rejected():
    """Test label codes outside 0..3 are rejected"""
    labels = np.zeros((2, 2, 2), dtype=np.uint8)
    labels[0, 0, 0] = 4
    with pytest.raises(InvalidLabelError):
        LabeledVolume(labels=labels, spacing=(1, 1, 1))


def test_bad_spacing_rejected():
    """Test non-positive spacing is rejected"""
    with pytest.raises(DataError):
        LabeledVolume(labels=np.zeros((2, 2, 2), dtype=np.uint8), spacing=(1.0, 0.0, 1.0))


def test_volume_is_read_only():
    """Test label arrays cannot be modified in place"""
    volume = LabeledVolume(labels=np.zeros((2, 2, 2), dtype=np.uint8), spacing=(1, 1, 1))
    with pytest.raises(ValueError):
        volume.labels[0, 0, 0] = 1


def test_extract_mask_and_volume():
    """Test mask extraction and physical volume in mm^3"""
    labels = np.zeros((4, 4, 4), dtype=np.uint8)
    labels[:2, :2, :2] = Structure.LV
    volume = LabeledVolume(labels=labels, spacing=(1.0, 2.0, 3.0))
    mask = extract_mask(volume, Structure.LV)
    assert mask.count == 8
    assert physical_volume_mm3(mask) == pytest.approx(48.0)
    assert extract_mask(volume, Structure.RV).is_empty()


def test_study_requires_matching_spacing():
    """Test ED and ES must share spacing"""
    ed = LabeledVolume(labels=np.zeros((2, 2, 2), dtype=np.uint8), spacing=(1, 1, 1))
    es = LabeledVolume(labels=np.zeros((2, 2, 2), dtype=np.uint8), spacing=(1, 1, 2))
    with pytest.raises(DataError):
        SubjectStudy(subject_id="s", ed=ed, es=es)


def test_study_label_range():
    """Test class labels must lie in 0..K-1"""
    study = box_study()
    with pytest.raises(DataError):
        SubjectStudy(subject_id="s", ed=study.ed, es=study.es, class_label=5, n_classes=5)


def test_save_and_load_volume(tmp_path):
    """Test a saved volume loads back with identical labels and spacing"""
    volume = box_study(spacing=(1.5, 1.5, 8.0)).ed
    header_path = VolumeRepository.save_volume(volume, tmp_path / "v.json")
    header = json.loads(header_path.read_text())
    assert header["magic"] == "CQV1"
    assert header["dims"] == [20, 20, 6]
    assert raw_path_for(header_path).stat().st_size == 20 * 20 * 6
    assert VolumeRepository.load_volume(header_path) == volume


def test_load_missing_volume(tmp_path):
    """Test a missing header names the path"""
    with pytest.raises(MissingFileError) as info:
        VolumeRepository.load_volume(tmp_path / "nope.json")
    assert "nope.json" in info.value.detail
    assert info.value.exit_code == 2


def test_load_size_mismatch(tmp_path):
    """Test a payload shorter than the header's dims is rejected"""
    header_path = VolumeRepository.save_volume(box_study().ed, tmp_path / "v.json")
    raw_path_for(header_path).write_bytes(b"\x00" * 10)
    with pytest.raises(VolumeFormatError):
        VolumeRepository.load_volume(header_path)


def test_load_bad_magic(tmp_path):
    """Test a header with the wrong magic is rejected"""
    header_path = VolumeRepository.save_volume(box_study().ed, tmp_path / "v.json")
    header = json.loads(header_path.read_text())
    header["magic"] = "XXXX"
    header_path.write_text(json.dumps(header))
    with pytest.raises(VolumeFormatError):
        VolumeRepository.load_volume(header_path)


def test_manifest_round_trip(tmp_path):
    """Test manifests keep order, labels and unknown labels"""
    records = [
        StudyRecord(subject_id="a", ed_path="a_ED.json", es_path="a_ES.json", class_label=1),
        StudyRecord(subject_id="b", ed_path="b_ED.json", es_path="b_ES.json", class_label=None),
    ]
    path = StudyRepository.write_manifest(records, tmp_path / "manifest.csv")
    assert StudyRepository.read_manifest(path) == records


def test_manifest_duplicate_subject(tmp_path):
    """Test a subject listed twice is rejected"""
    path = tmp_path / "manifest.csv"
    path.write_text("subject_id,ed_path,es_path,class_label\na,x,y,0\na,x,y,1\n")
    with pytest.raises(DataError):
        StudyRepository.read_manifest(path)


def test_load_studies(tmp_path):
    """Test studies load through the manifest with relative paths"""
    study = box_study("s9", class_label=2)
    VolumeRepository.save_volume(study.ed, tmp_path / "vol" / "s9_ED.json")
    VolumeRepository.save_volume(study.es, tmp_path / "vol" / "s9_ES.json")
    StudyRepository.write_manifest(
        [StudyRecord(subject_id="s9", ed_path="vol/s9_ED.json", es_path="vol/s9_ES.json", class_label=2)],
        tmp_path / "manifest.csv",
    )
    loaded = StudyRepository.load_studies(tmp_path / "manifest.csv")
    assert len(loaded) == 1
    assert loaded[0].class_label == 2
    assert loaded[0].ed == study.ed and loaded[0].es == study.es


def test_binary_mask_coordinates():
    """Test physical coordinates are index times spacing"""
    bits = np.zeros((3, 3, 3), dtype=bool)
    bits[1, 2, 0] = True
    mask = BinaryMask(bits=bits, spacing=(2.0, 3.0, 4.0))
    np.testing.assert_allclose(mask.coordinates_mm(), [[2.0, 6.0, 0.0]])
