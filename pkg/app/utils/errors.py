"""
Custom exceptions for the pipeline.

Every exception carries the process exit code: 1 usage, 2 data error,
3 convergence failure.
"""
from typing import Optional

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_CONVERGENCE = 3


class CardiacPipelineError(Exception):
    """Base exception for the cine-MR pipeline"""
    def __init__(self, detail: str = "An error occurred", exit_code: int = EXIT_DATA):
        super().__init__(detail)
        self.detail = detail
        self.exit_code = exit_code

    def __reduce__(self):
        # subclass constructors differ, so unpickling rebuilds from state
        return _rebuild_error, (type(self), self.detail, self.exit_code, dict(self.__dict__))


def _rebuild_error(cls, detail, exit_code, state):
    error = cls.__new__(cls)
    CardiacPipelineError.__init__(error, detail, exit_code)
    error.__dict__.update(state)
    return error


class UsageError(CardiacPipelineError):
    """Raised for invalid command-line usage or configuration"""
    def __init__(self, detail: str = "Invalid usage"):
        super().__init__(detail=detail, exit_code=EXIT_USAGE)


class DataError(CardiacPipelineError):
    """Base class for errors caused by input data"""
    def __init__(self, detail: str = "Invalid data"):
        super().__init__(detail=detail, exit_code=EXIT_DATA)


class VolumeFormatError(DataError):
    """Raised when a CQV1 volume is malformed"""
    def __init__(self, path: str, reason: str):
        super().__init__(f"Malformed volume {path}: {reason}")


class InvalidLabelError(DataError):
    """Raised when a label map holds codes outside {0, 1, 2, 3}"""
    def __init__(self, codes):
        super().__init__(f"Invalid label codes {sorted(int(c) for c in codes)}; expected 0 (BG), 1 (RV), 2 (MC), 3 (LV)")


class DimensionMismatchError(DataError):
    """Raised when two arrays or masks have incompatible shapes"""
    def __init__(self, left, right, what: str = "dims"):
        super().__init__(f"{what} mismatch: {tuple(left)} vs {tuple(right)}")


class EmptyStructureError(DataError):
    """Raised when a required structure has no voxels"""
    def __init__(self, structure: str, context: str = ""):
        suffix = f" ({context})" if context else ""
        super().__init__(f"Structure {structure} is empty{suffix}")


class DegenerateStructureError(DataError):
    """Raised when a structure is too small for a measurement"""
    def __init__(self, detail: str):
        super().__init__(detail)


class FeatureExtractionError(DataError):
    """Raised when a feature cannot be computed; names the feature"""
    def __init__(self, feature_name: str, cause: Exception, subject_id: Optional[str] = None):
        self.feature_name = feature_name
        self.subject_id = subject_id
        self.cause = cause
        where = f"subject {subject_id}, " if subject_id else ""
        reason = getattr(cause, "detail", str(cause))
        super().__init__(f"{where}feature {feature_name}: {reason}")


class UndefinedDistanceError(DataError):
    """Raised when a Hausdorff distance is requested for an empty mask"""
    def __init__(self, detail: str = "Hausdorff distance is undefined for an empty mask"):
        super().__init__(detail)


class GeometryError(DataError):
    """Raised when a phantom does not fit inside its volume"""
    def __init__(self, detail: str):
        super().__init__(detail)


class SelectionError(DataError):
    """Raised when feature selection cannot run on the given data"""
    def __init__(self, detail: str):
        super().__init__(detail)


class InfeasibleNuError(DataError):
    """Raised when nu exceeds the nu-SVC feasibility bound"""
    def __init__(self, nu: float, bound: float, class_name: str = ""):
        which = f" for class {class_name}" if class_name else ""
        super().__init__(f"nu={nu:g} is infeasible{which}: must be <= 2*min(N+,N-)/N = {bound:g}")


class ZeroVarianceError(DataError):
    """Raised when a feature column has zero variance at standardizer fit"""
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"Feature column {column} has zero variance")


class MissingFileError(DataError):
    """Raised when a referenced file does not exist"""
    def __init__(self, path: str):
        self.path = path
        super().__init__(f"File not found: {path}")


class UnpairedSubjectError(DataError):
    """Raised when a subject is present on one side of a comparison only"""
    def __init__(self, subject_id: str, side: str):
        super().__init__(f"Subject {subject_id} has no {side} volume")


class ConvergenceError(CardiacPipelineError):
    """Raised when an optimizer diverges or fails to converge in strict mode"""
    def __init__(self, detail: str = "Optimization failed to converge"):
        super().__init__(detail=detail, exit_code=EXIT_CONVERGENCE)


class FoldFailedError(CardiacPipelineError):
    """Raised when training or evaluation fails inside a cross-validation fold"""
    def __init__(self, repeat: int, fold: int, cause: Exception):
        self.repeat = repeat
        self.fold = fold
        self.cause = cause
        reason = getattr(cause, "detail", str(cause))
        super().__init__(
            detail=f"repeat {repeat}, fold {fold}: {reason}",
            exit_code=getattr(cause, "exit_code", EXIT_DATA),
        )


class StageFailedError(CardiacPipelineError):
    """Raised when a pipeline stage fails; names the stage"""
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        reason = getattr(cause, "detail", str(cause))
        super().__init__(
            detail=f"stage {stage} failed: {reason}",
            exit_code=getattr(cause, "exit_code", EXIT_DATA),
        )
