"""
Unit tests for manifest-driven feature assembly
"""
import numpy as np
import pytest

from app.models.features import FeatureGroup
from app.models.phantom import default_spec
from app.models.volume import Structure, SubjectStudy
from app.services.feature_extractor import assemble_features, default_manifest, extract_feature_table
from app.services.phantom import generate_phantom
from app.utils.errors import DataError, FeatureExtractionError


@pytest.fixture(scope="module")
def study():
    return generate_phantom(default_spec(0, seed=21), subject_id="p1")


def test_default_manifest_accounting():
    """Test 12 volumetric, 54 thickness and 59 shape entries"""
    manifest = default_manifest()
    assert len(manifest) == 125
    assert manifest.group_counts() == {"volumetric": 12, "thickness": 54, "shape": 59}
    assert manifest.find("RV_ES_compactness2") is None
    assert manifest.find("LV_EF").group == FeatureGroup.VOLUMETRIC


def test_phantom_gives_125_finite_values(study):
    """Test every default feature is finite and in manifest order"""
    vector = assemble_features(study)
    assert len(vector) == 125
    assert list(vector.names) == default_manifest().names
    assert np.all(np.isfinite(vector.values))


def test_assembly_is_deterministic(study):
    """Test two runs give bit-identical vectors"""
    np.testing.assert_array_equal(assemble_features(study).values, assemble_features(study).values)


def test_sub_manifest(study):
    """Test a partial manifest yields just its entries"""
    manifest = default_manifest().select(["LV_EDV", "LV_ED_sphericity"])
    vector = assemble_features(study, manifest)
    assert vector.names == ("LV_EDV", "LV_ED_sphericity")
    assert vector["LV_EDV"] == pytest.approx(assemble_features(study)["LV_EDV"])


def test_empty_rv_names_failing_feature(study):
    """Test an empty RV at ES fails on an RV_ES feature of that subject"""
    labels = np.array(study.es.labels)
    labels[labels == Structure.RV] = Structure.BG
    broken = SubjectStudy(subject_id="p1", ed=study.ed, es=study.es.with_labels(labels))
    with pytest.raises(FeatureExtractionError) as info:
        assemble_features(broken)
    assert info.value.feature_name.startswith("RV_ES")
    assert info.value.subject_id == "p1"
    assert info.value.exit_code == 2


def test_feature_table(study):
    """Test a cohort table has one row per study and the manifest's groups"""
    other = generate_phantom(default_spec(1, seed=22), subject_id="p2")
    table = extract_feature_table([study, other])
    assert table.X.shape == (2, 125)
    assert table.subject_ids == ("p1", "p2")
    assert table.groups.count("volumetric") == 12
    with pytest.raises(DataError):
        extract_feature_table([study])
