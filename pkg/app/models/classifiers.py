"""
Trained classifier parameters. Every model converts to and from a plain dict
so an ensemble can be stored as one JSON document.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np


def _array(value) -> np.ndarray:
    return np.asarray(value, dtype=float)


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Per-feature mean and standard deviation learned on training rows"""
    mean: np.ndarray
    scale: np.ndarray
    feature_names: Tuple[str, ...] = ()

    @property
    def n_features(self) -> int:
        return int(self.mean.size)

    def to_dict(self) -> Dict[str, Any]:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist(), "feature_names": list(self.feature_names)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Standardizer":
        return cls(mean=_array(data["mean"]), scale=_array(data["scale"]), feature_names=tuple(data["feature_names"]))


@dataclass(frozen=True, eq=False)
class LogisticClassifier:
    """Multinomial softmax: scores = X W + b"""
    weights: np.ndarray
    intercepts: np.ndarray
    converged: bool = True
    n_iter: int = 0

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "weights": self.weights.tolist(),
            "intercepts": self.intercepts.tolist(),
            "converged": self.converged,
            "n_iter": self.n_iter,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LogisticClassifier":
        return cls(
            weights=_array(data["weights"]),
            intercepts=_array(data["intercepts"]),
            converged=bool(data["converged"]),
            n_iter=int(data["n_iter"]),
        )


@dataclass(frozen=True, eq=False)
class MlpClassifier:
    """One tanh hidden layer of 10 units followed by a softmax output"""
    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    output_weights: np.ndarray
    output_biases: np.ndarray
    final_loss: float = 0.0

    @property
    def n_features(self) -> int:
        return int(self.hidden_weights.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "hidden_weights": self.hidden_weights.tolist(),
            "hidden_biases": self.hidden_biases.tolist(),
            "output_weights": self.output_weights.tolist(),
            "output_biases": self.output_biases.tolist(),
            "final_loss": self.final_loss,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MlpClassifier":
        return cls(
            hidden_weights=_array(data["hidden_weights"]),
            hidden_biases=_array(data["hidden_biases"]),
            output_weights=_array(data["output_weights"]),
            output_biases=_array(data["output_biases"]),
            final_loss=float(data["final_loss"]),
        )


@dataclass(frozen=True, eq=False)
class BinaryNuSvm:
    """One one-vs-rest nu-SVC: f(x) = sum_i coef_i K(sv_i, x) - rho, with Platt (a, b)"""
    support_vectors: np.ndarray
    dual_coef: np.ndarray
    rho: float
    platt_a: float = -1.0
    platt_b: float = 0.0
    n_iter: int = 0
    converged: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "rho": self.rho,
            "platt_a": self.platt_a,
            "platt_b": self.platt_b,
            "n_iter": self.n_iter,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BinaryNuSvm":
        return cls(
            support_vectors=np.array(data["support_vectors"], dtype=float, ndmin=2),
            dual_coef=_array(data["dual_coef"]),
            rho=float(data["rho"]),
            platt_a=float(data["platt_a"]),
            platt_b=float(data["platt_b"]),
            n_iter=int(data["n_iter"]),
            converged=bool(data["converged"]),
        )


@dataclass(frozen=True, eq=False)
class NuSvmClassifier:
    """Per-class one-vs-rest nu-SVCs on the sigmoid kernel tanh(gamma <x, x'> + coef0)"""
    machines: Tuple[BinaryNuSvm, ...]
    nu: float
    gamma: float
    coef0: float
    n_features: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "machines": [m.to_dict() for m in self.machines],
            "nu": self.nu,
            "gamma": self.gamma,
            "coef0": self.coef0,
            "n_features": self.n_features,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NuSvmClassifier":
        return cls(
            machines=tuple(BinaryNuSvm.from_dict(m) for m in data["machines"]),
            nu=float(data["nu"]),
            gamma=float(data["gamma"]),
            coef0=float(data["coef0"]),
            n_features=int(data["n_features"]),
        )


@dataclass(frozen=True, eq=False)
class TrainedEnsemble:
    """Standardizer plus the three base models, all trained on one feature subset"""
    standardizer: Standardizer
    lr: LogisticClassifier
    mlp: MlpClassifier
    svm: NuSvmClassifier
    weights: Tuple[float, float, float] = (1.0, 1.0, 2.0)
    class_names: Tuple[str, ...] = ()
    feature_names: Tuple[str, ...] = ()
    seed: int = 0
    config: Dict[str, Any] = field(default_factory=dict)
    selection: Optional[Dict[str, Any]] = None

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format": "cardiac-ensemble/1",
            "class_names": list(self.class_names),
            "feature_names": list(self.feature_names),
            "weights": list(self.weights),
            "seed": self.seed,
            "standardizer": self.standardizer.to_dict(),
            "lr": self.lr.to_dict(),
            "mlp": self.mlp.to_dict(),
            "svm": self.svm.to_dict(),
            "config": self.config,
            "selection": self.selection,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainedEnsemble":
        return cls(
            standardizer=Standardizer.from_dict(data["standardizer"]),
            lr=LogisticClassifier.from_dict(data["lr"]),
            mlp=MlpClassifier.from_dict(data["mlp"]),
            svm=NuSvmClassifier.from_dict(data["svm"]),
            weights=tuple(float(w) for w in data["weights"]),
            class_names=tuple(data["class_names"]),
            feature_names=tuple(data["feature_names"]),
            seed=int(data["seed"]),
            config=dict(data.get("config") or {}),
            selection=data.get("selection"),
        )

