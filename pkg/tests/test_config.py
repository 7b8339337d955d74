"""
Unit tests for settings and the JSON pipeline config
"""
import json

import pytest

from app.config import Settings
from app.schemas.pipeline import PipelineConfig, SelectionMethod, load_config
from app.utils.errors import MissingFileError, UsageError


def _write(tmp_path, data):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return path


def test_defaults_without_file():
    """Test no config path gives the documented defaults"""
    config = load_config(None)
    assert config.n_classes == 5
    assert config.connectivity == 26
    assert config.selection.method == SelectionMethod.RANDOMIZED
    assert config.selection.stage1_count == 30
    assert config.selection.stage2_count == 20
    assert config.classifier.weights == [1.0, 1.0, 2.0]
    assert config.classifier.svm_nu == pytest.approx(0.3)
    assert (config.cv.k, config.cv.n_repeats) == (8, 8)
    assert config.cv.paper_order is False


def test_file_overrides(tmp_path):
    path = _write(tmp_path, {"seed": 9, "selection": {"method": "lasso"}, "cv": {"k": 4}})
    config = load_config(path)
    assert config.seed == 9
    assert config.selection.method == SelectionMethod.LASSO
    assert config.cv.k == 4
    assert config.cv.n_repeats == 8


def test_bad_files(tmp_path):
    """Test unknown keys, broken JSON, non-objects and missing files"""
    with pytest.raises(UsageError):
        load_config(_write(tmp_path, {"sead": 1}))
    with pytest.raises(UsageError):
        load_config(_write(tmp_path, "{not json"))
    with pytest.raises(UsageError):
        load_config(_write(tmp_path, "[1, 2]"))
    with pytest.raises(MissingFileError):
        load_config(tmp_path / "absent.json")


def test_value_checks(tmp_path):
    """Test class names, connectivity and grid keys are validated"""
    with pytest.raises(UsageError):
        load_config(_write(tmp_path, {"n_classes": 3, "class_names": ["a", "b"]}))
    with pytest.raises(UsageError):
        load_config(_write(tmp_path, {"connectivity": 18}))
    with pytest.raises(UsageError):
        load_config(_write(tmp_path, {"cv": {"param_grid": {"depth": [1, 2]}}}))
    with pytest.raises(UsageError):
        load_config(_write(tmp_path, {"classifier": {"weights": [1.0, 0.0, 2.0]}}))


def test_with_overrides():
    """Test command-line overrides land in the right section and None is ignored"""
    config = PipelineConfig(seed=1).with_overrides(seed=None, paper_order=True, n_jobs=2)
    assert config.seed == 1
    assert config.cv.paper_order is True
    assert config.n_jobs == 2
    with pytest.raises(UsageError):
        PipelineConfig().with_overrides(connectivity=18)


def test_resolved_class_names():
    assert PipelineConfig(n_classes=3).resolved_class_names() == ["0", "1", "2"]
    assert PipelineConfig(n_classes=2, class_names=["a", "b"]).resolved_class_names() == ["a", "b"]


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("DEFAULT_SEED", "7")
    monkeypatch.setenv("N_JOBS", "3")
    fresh = Settings()
    assert fresh.DEFAULT_SEED == 7
    assert fresh.N_JOBS == 3


def test_grid_accepts_selection_fields(tmp_path):
    """Test a grid may mix selection and classifier fields"""
    grid = {"lambda_min_ratio": [0.1, 0.3], "stage2_count": [10, 20], "svm_nu": [0.3]}
    config = load_config(_write(tmp_path, {"cv": {"param_grid": grid}}))
    assert config.cv.param_grid == grid
