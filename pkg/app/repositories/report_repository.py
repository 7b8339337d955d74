"""
Report data access layer: JSON reports, CSV summaries and trained models
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import pandas as pd

from app.models.classifiers import TrainedEnsemble
from app.schemas.reports import ComparisonReport, CvReport, GridSearchResult
from app.storage import storage
from app.utils.errors import DataError, MissingFileError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    with storage.open_atomic(path) as handle:
        frame.to_csv(handle, index=False, float_format="%.10g", lineterminator="\n")
    return Path(path)


class ReportRepository:
    """Repository for everything a command writes besides volumes and feature tables"""

    @staticmethod
    def write_document(document: Any, path: PathLike) -> Path:
        """Pydantic models are dumped in JSON mode, anything else is written as given"""
        payload = document.model_dump(mode="json") if hasattr(document, "model_dump") else document
        storage.write_json(path, payload)
        logger.info(f"Wrote {path}")
        return Path(path)

    @staticmethod
    def write_cv_report(report: CvReport, output_dir: PathLike, stem: str = "cv") -> List[Path]:
        """<stem>.json with everything, <stem>_folds.csv with one row per fold"""
        directory = storage.ensure_dir(output_dir)
        frame = pd.DataFrame(
            [
                {
                    "repeat": f.repeat,
                    "fold": f.fold,
                    "accuracy": f.accuracy,
                    "n_test": f.n_test,
                    "selected_features": ";".join(f.selected_features),
                }
                for f in report.folds
            ],
            columns=["repeat", "fold", "accuracy", "n_test", "selected_features"],
        )
        return [
            ReportRepository.write_document(report, directory / f"{stem}.json"),
            _write_frame(frame, directory / f"{stem}_folds.csv"),
        ]

    @staticmethod
    def write_grid_search(result: GridSearchResult, output_dir: PathLike) -> List[Path]:
        directory = storage.ensure_dir(output_dir)
        frame = pd.DataFrame(
            [
                {"params": json.dumps(p.params, sort_keys=True), "mean": p.mean, "std": p.std, "best": i == result.best_index}
                for i, p in enumerate(result.points)
            ],
            columns=["params", "mean", "std", "best"],
        )
        return [
            ReportRepository.write_document(result, directory / "grid_search.json"),
            _write_frame(frame, directory / "grid_search.csv"),
        ]

    @staticmethod
    def write_comparison(report: ComparisonReport, output_dir: PathLike) -> List[Path]:
        """Sources as rows, one 'mean ± std' column per selection method"""
        directory = storage.ensure_dir(output_dir)
        rows = []
        for source in report.sources:
            row: Dict[str, Any] = {"source": source}
            for method in report.methods:
                cell = report.cell(source, method)
                row[method] = f"{100 * cell.mean:.2f} ± {100 * cell.std:.2f}"
            rows.append(row)
        frame = pd.DataFrame(rows, columns=["source", *report.methods])
        return [
            ReportRepository.write_document(report, directory / "comparison.json"),
            _write_frame(frame, directory / "comparison.csv"),
        ]

    @staticmethod
    def write_seg_metrics(rows: Sequence[Dict], summary: Sequence[Dict], path: PathLike) -> Path:
        """Per-subject rows followed by one mean and one std row per structure"""
        records = [
            {"subject_id": r["subject_id"], "phase": r["phase"], "structure": r["structure"],
             "dice": r["dice"], "hausdorff_mm": r["hausdorff_mm"]}
            for r in rows
        ]
        for s in summary:
            records.append({"subject_id": "mean", "phase": "", "structure": s["structure"],
                            "dice": s["dice_mean"], "hausdorff_mm": s["hausdorff_mean"]})
            records.append({"subject_id": "std", "phase": "", "structure": s["structure"],
                            "dice": s["dice_std"], "hausdorff_mm": s["hausdorff_std"]})
        frame = pd.DataFrame(records, columns=["subject_id", "phase", "structure", "dice", "hausdorff_mm"])
        return _write_frame(frame, path)

    @staticmethod
    def write_predictions(
        subject_ids: Sequence[str],
        predicted: np.ndarray,
        distributions: np.ndarray,
        class_names: Sequence[str],
        path: PathLike,
    ) -> Path:
        frame = pd.DataFrame({"subject_id": list(subject_ids)})
        frame["predicted"] = [class_names[int(c)] for c in predicted]
        for k, name in enumerate(class_names):
            frame[f"p_{name}"] = distributions[:, k]
        return _write_frame(frame, path)

    @staticmethod
    def write_model(ensemble: TrainedEnsemble, path: PathLike) -> Path:
        storage.write_json(path, ensemble.to_dict())
        logger.info(f"Saved ensemble to {path}")
        return Path(path)

    @staticmethod
    def load_model(path: PathLike) -> TrainedEnsemble:
        model_path = Path(path)
        if not model_path.is_file():
            raise MissingFileError(str(model_path))
        try:
            data = json.loads(model_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise DataError(f"Model {model_path} is not valid JSON: {e}")
        if not isinstance(data, dict) or data.get("format") != "cardiac-ensemble/1":
            raise DataError(f"Model {model_path} is not a trained ensemble")
        try:
            return TrainedEnsemble.from_dict(data)
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"Model {model_path} is incomplete: {e}")
