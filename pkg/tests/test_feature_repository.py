"""
Unit tests for feature tables, feature manifests and label lookup
"""
import numpy as np
import pytest

from app.models.learning import FeatureMatrix
from app.repositories.feature_repository import FeatureRepository, format_params, parse_params
from app.repositories.study_repository import StudyRepository
from app.schemas.volume import StudyRecord
from app.services.feature_extractor import default_manifest
from app.utils.errors import DataError, MissingFileError


def test_params_text():
    """Test params serialize as key=value pairs and parse back"""
    assert format_params({"stat": "count_gt", "threshold": "12"}) == "stat=count_gt;threshold=12"
    assert parse_params("stat=count_gt; threshold=12") == {"stat": "count_gt", "threshold": "12"}
    assert parse_params("") == {}
    with pytest.raises(DataError):
        parse_params("threshold")


def test_manifest_file(tmp_path):
    """Test the default manifest survives a write and read"""
    manifest = default_manifest()
    path = FeatureRepository.write_manifest(manifest, tmp_path / "feature_manifest.csv")
    assert FeatureRepository.read_manifest(path) == manifest


def test_manifest_unknown_group(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("name,group,structure,phase,params\nx,texture,LV,ED,\n")
    with pytest.raises(DataError):
        FeatureRepository.read_manifest(path)


def test_table_keeps_values_exactly(tmp_path):
    """Test written values read back bit for bit, with subject ids as text"""
    rng = np.random.default_rng(2)
    table = FeatureMatrix(
        X=rng.normal(size=(3, 2)) * 1e3,
        feature_names=("LV_EDV", "LV_EF"),
        subject_ids=("007", "a", "b"),
    )
    path = FeatureRepository.write_table(table, tmp_path / "features.csv")
    back = FeatureRepository.read_table(path)
    np.testing.assert_array_equal(back.X, table.X)
    assert back.subject_ids == ("007", "a", "b")
    assert back.feature_names == table.feature_names


def test_table_groups_from_manifest(tmp_path):
    """Test groups come from the manifest and unknown columns are refused"""
    path = tmp_path / "features.csv"
    path.write_text("subject_id,LV_EDV,MC_ED_thickness_max\na,1,2\nb,3,4\n")
    table = FeatureRepository.read_table(path, default_manifest())
    assert table.groups == ("volumetric", "thickness")

    path.write_text("subject_id,LV_EDV,texture_energy\na,1,2\nb,3,4\n")
    with pytest.raises(DataError):
        FeatureRepository.read_table(path, default_manifest())


def test_table_errors(tmp_path):
    """Test missing files, a missing id column and non-numeric cells"""
    with pytest.raises(MissingFileError):
        FeatureRepository.read_table(tmp_path / "none.csv")
    path = tmp_path / "bad.csv"
    path.write_text("id,LV_EDV\na,1\nb,2\n")
    with pytest.raises(DataError):
        FeatureRepository.read_table(path)
    path.write_text("subject_id,LV_EDV\na,1\nb,big\n")
    with pytest.raises(DataError):
        FeatureRepository.read_table(path)


def test_read_labels(tmp_path):
    """Test labels follow the requested subject order and unlabeled subjects are refused"""
    records = [
        StudyRecord(subject_id="a", ed_path="a_ED.json", es_path="a_ES.json", class_label=3),
        StudyRecord(subject_id="b", ed_path="b_ED.json", es_path="b_ES.json", class_label=1),
        StudyRecord(subject_id="c", ed_path="c_ED.json", es_path="c_ES.json", class_label=None),
    ]
    path = StudyRepository.write_manifest(records, tmp_path / "manifest.csv")
    np.testing.assert_array_equal(FeatureRepository.read_labels(path, ["b", "a"]), [1, 3])
    with pytest.raises(DataError):
        FeatureRepository.read_labels(path, ["c"])
    with pytest.raises(DataError):
        FeatureRepository.read_labels(path, ["z"])
