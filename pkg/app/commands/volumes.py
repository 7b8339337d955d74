"""
Volume commands: phantom generation, post-processing and segmentation scoring
"""
import argparse
import logging
from pathlib import Path
from typing import Dict, List

import numpy as np

from app.commands.common import add_output_argument, effective_config, output_dir, resolve_manifest_path, study_manifest
from app.config import settings
from app.models.volume import Phase, SubjectStudy
from app.repositories.report_repository import ReportRepository
from app.repositories.study_repository import StudyRepository
from app.repositories.volume_repository import VolumeRepository
from app.schemas.volume import StudyRecord
from app.services.phantom import generate_cohort, perturb_segmentation
from app.services.postprocess import keep_largest_component
from app.services.seg_metrics import score_volumes, summarize_scores
from app.utils.errors import UnpairedSubjectError, UsageError

logger = logging.getLogger(__name__)

VOLUME_SUBDIR = "volumes"
# entropy suffix separating perturbation seeds from generation seeds
PERTURB_STREAM = 1


def save_cohort(studies: List[SubjectStudy], directory: Path) -> Path:
    """Write every study's volumes under <directory>/volumes and the manifest beside them"""
    records = []
    for study in studies:
        paths = {}
        for phase in (Phase.ED, Phase.ES):
            relative = Path(VOLUME_SUBDIR) / f"{study.subject_id}_{phase.value}.json"
            VolumeRepository.save_volume(study.phase(phase.value), directory / relative)
            paths[phase] = relative.as_posix()
        records.append(StudyRecord(
            subject_id=study.subject_id,
            ed_path=paths[Phase.ED],
            es_path=paths[Phase.ES],
            class_label=study.class_label,
        ))
    return StudyRepository.write_manifest(records, directory / settings.MANIFEST_FILENAME)


def perturb_study(study: SubjectStudy, noise: int, blob_rate: float, seed: int) -> SubjectStudy:
    ed_seed, es_seed = np.random.SeedSequence(seed).generate_state(2)
    return SubjectStudy(
        subject_id=study.subject_id,
        ed=perturb_segmentation(study.ed, noise, blob_rate, int(ed_seed)),
        es=perturb_segmentation(study.es, noise, blob_rate, int(es_seed)),
        class_label=study.class_label,
        n_classes=study.n_classes,
    )


def cmd_phantom(args: argparse.Namespace) -> int:
    """Generate a phantom cohort, plus a perturbed copy when noise or blobs are requested"""
    config = effective_config(args)
    if args.noise < 0 or args.blob_rate < 0:
        raise UsageError("--noise and --blob-rate must be >= 0")
    directory = output_dir(args, config)
    studies = generate_cohort(
        args.per_class,
        seed=config.seed,
        dims=tuple(args.dims) if args.dims else None,
        spacing=tuple(args.spacing) if args.spacing else None,
        n_jobs=config.n_jobs,
    )
    manifest = save_cohort(studies, directory / "truth")
    print(f"Wrote {len(studies)} phantoms to {manifest}")

    if args.noise or args.blob_rate:
        children = np.random.SeedSequence([config.seed, PERTURB_STREAM]).spawn(len(studies))
        perturbed = [
            perturb_study(study, args.noise, args.blob_rate, int(child.generate_state(1)[0]))
            for study, child in zip(studies, children)
        ]
        manifest = save_cohort(perturbed, directory / "predicted")
        print(f"Wrote perturbed copies (noise {args.noise}, blob rate {args.blob_rate}) to {manifest}")
    return 0


def cmd_postprocess(args: argparse.Namespace) -> int:
    """Keep the largest foreground component of every volume of a cohort"""
    config = effective_config(args)
    manifest_path = study_manifest(args, config)
    studies = StudyRepository.load_studies(manifest_path, n_classes=config.n_classes, n_jobs=config.n_jobs)
    cleaned = [
        SubjectStudy(
            subject_id=s.subject_id,
            ed=keep_largest_component(s.ed, config.connectivity),
            es=keep_largest_component(s.es, config.connectivity),
            class_label=s.class_label,
            n_classes=s.n_classes,
        )
        for s in studies
    ]
    manifest = save_cohort(cleaned, output_dir(args, config))
    print(f"Post-processed {len(cleaned)} studies (connectivity {config.connectivity}) into {manifest}")
    return 0


def pair_studies(predicted: List[SubjectStudy], truth: List[SubjectStudy]):
    """(predicted, truth) pairs in truth order; every subject must appear on both sides"""
    by_id: Dict[str, SubjectStudy] = {s.subject_id: s for s in predicted}
    truth_ids = {s.subject_id for s in truth}
    for s in predicted:
        if s.subject_id not in truth_ids:
            raise UnpairedSubjectError(s.subject_id, "truth")
    pairs = []
    for s in truth:
        if s.subject_id not in by_id:
            raise UnpairedSubjectError(s.subject_id, "predicted")
        pairs.append((by_id[s.subject_id], s))
    return pairs


def format_seg_summary(summary: List[Dict]) -> str:
    lines = [f"{'Structure':<10}{'Dice':>18}{'Hausdorff (mm)':>22}"]
    for s in summary:
        distance = "undefined" if s["hausdorff_mean"] is None else f"{s['hausdorff_mean']:.2f} ± {s['hausdorff_std']:.2f}"
        lines.append(f"{s['structure']:<10}{s['dice_mean']:>11.3f} ± {s['dice_std']:.3f}{distance:>22}")
    return "\n".join(lines)


def cmd_evaluate_seg(args: argparse.Namespace) -> int:
    """Dice and Hausdorff per subject, phase and structure, with mean and std rows"""
    config = effective_config(args)
    predicted = StudyRepository.load_studies(resolve_manifest_path(args.predicted), n_classes=config.n_classes)
    truth = StudyRepository.load_studies(resolve_manifest_path(args.truth), n_classes=config.n_classes)

    rows = []
    for p, t in pair_studies(predicted, truth):
        for phase in (Phase.ED, Phase.ES):
            scores = score_volumes(p.phase(phase.value), t.phase(phase.value))
            for structure, score in scores.items():
                rows.append({
                    "subject_id": t.subject_id,
                    "phase": phase.value,
                    "structure": structure,
                    "dice": score.dice,
                    "hausdorff_mm": score.hausdorff_mm,
                })
    summary = summarize_scores(rows)
    path = ReportRepository.write_seg_metrics(rows, summary, output_dir(args, config) / "seg_metrics.csv")
    print(format_seg_summary(summary))
    print(f"Wrote {path}")
    return 0


def register(subparsers: argparse._SubParsersAction):
    """Attach the volume commands to the root parser"""
    phantom = subparsers.add_parser("phantom", help="Generate a synthetic phantom cohort")
    phantom.add_argument("--per-class", type=int, default=20, help="Phantoms per class (default 20)")
    phantom.add_argument("--dims", type=int, nargs=3, metavar=("NX", "NY", "NZ"), default=None)
    phantom.add_argument("--spacing", type=float, nargs=3, metavar=("SX", "SY", "SZ"), default=None)
    phantom.add_argument("--noise", type=int, default=0, help="Boundary noise in voxels for the perturbed copy")
    phantom.add_argument("--blob-rate", type=float, default=0.0, help="Spurious blobs per slice for the perturbed copy")
    add_output_argument(phantom)
    phantom.set_defaults(handler=cmd_phantom)

    postprocess = subparsers.add_parser("postprocess", help="Keep the largest connected component")
    postprocess.add_argument("--manifest", default=None, help="Study manifest CSV or its directory")
    add_output_argument(postprocess)
    postprocess.set_defaults(handler=cmd_postprocess)

    evaluate = subparsers.add_parser("evaluate-seg", help="Score predicted segmentations against the truth")
    evaluate.add_argument("predicted", help="Predicted study manifest or its directory")
    evaluate.add_argument("truth", help="Reference study manifest or its directory")
    add_output_argument(evaluate)
    evaluate.set_defaults(handler=cmd_evaluate_seg)
