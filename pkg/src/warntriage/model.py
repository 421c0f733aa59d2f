"""Two-stage detector/reranker over hashed warning embeddings.

One shared tanh hidden layer feeds two heads: a sigmoid detector (actionable
vs false) and a 4-way softmax reranker. The reranker is warm-started from
the trained detector body, then fine-tuned on weak labels; its class
probabilities map to the triage ranking score.

All training is plain mini-batch gradient descent with seeded shuffling:
reproducibility outranks convergence speed at this scale.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from warntriage.core import (
    CLASS_ORDER,
    ContractViolation,
    TriageError,
    Warning,
    WeakLabelClass,
)
from warntriage.encoding import EmbeddingVector, channels_for, embed
from warntriage.ingest.history import SourceSnapshot

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
DEFAULT_HIDDEN_DIM = 64
DEFAULT_THRESHOLD = 0.5

_INIT_SCALE = 0.05
_WARM_HEAD_SCALE = 0.01


class Stage(str, Enum):
    DETECTOR_ONLY = "detector_only"
    FULL = "full"


class TrainingError(TriageError):
    """The dataset cannot support the requested training run."""


class ModelFormatError(TriageError):
    """A persisted model file fails validation."""


@dataclass
class TrainingConfig:
    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int = 64
    class_weighting: str = "inverse_frequency"  # or "none"
    seed: int = 0
    convergence_tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ContractViolation("learning_rate must be positive")
        if self.epochs < 0:
            raise ContractViolation("epochs must be >= 0")
        if self.batch_size < 1:
            raise ContractViolation("batch_size must be >= 1")
        if self.class_weighting not in ("none", "inverse_frequency"):
            raise ContractViolation(f"unknown class_weighting {self.class_weighting!r}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "class_weighting": self.class_weighting,
            "seed": self.seed,
            "convergence_tol": self.convergence_tol,
        }


@dataclass
class ModelParams:
    embed_dim: int
    hidden_dim: int
    seed: int
    stage: Stage
    w1: np.ndarray  # (H, D)
    b1: np.ndarray  # (H,)
    w_det: np.ndarray  # (H,)
    b_det: float
    w_rr: np.ndarray | None = None  # (4, H)
    b_rr: np.ndarray | None = None  # (4,)

    def __post_init__(self) -> None:
        if self.w1.shape != (self.hidden_dim, self.embed_dim):
            raise ContractViolation("body weight shape does not match declared dims")
        if self.stage is Stage.FULL and (self.w_rr is None or self.b_rr is None):
            raise ContractViolation("full-stage params require a reranker head")
        for arr in (self.w1, self.b1, self.w_det, self.w_rr, self.b_rr):
            if arr is not None and not np.isfinite(arr).all():
                raise ContractViolation("model weights must be finite")

    def copy(self) -> "ModelParams":
        return ModelParams(
            embed_dim=self.embed_dim,
            hidden_dim=self.hidden_dim,
            seed=self.seed,
            stage=self.stage,
            w1=self.w1.copy(),
            b1=self.b1.copy(),
            w_det=self.w_det.copy(),
            b_det=float(self.b_det),
            w_rr=None if self.w_rr is None else self.w_rr.copy(),
            b_rr=None if self.b_rr is None else self.b_rr.copy(),
        )


def init_detector_params(
    embed_dim: int, hidden_dim: int = DEFAULT_HIDDEN_DIM, seed: int = 0
) -> ModelParams:
    rng = np.random.default_rng([seed, 0])
    return ModelParams(
        embed_dim=embed_dim,
        hidden_dim=hidden_dim,
        seed=seed,
        stage=Stage.DETECTOR_ONLY,
        w1=rng.uniform(-_INIT_SCALE, _INIT_SCALE, (hidden_dim, embed_dim)),
        b1=np.zeros(hidden_dim),
        w_det=rng.uniform(-_INIT_SCALE, _INIT_SCALE, hidden_dim),
        b_det=0.0,
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=1, keepdims=True)


def _hidden(params: ModelParams, X: np.ndarray) -> np.ndarray:
    return np.tanh(X @ params.w1.T + params.b1)


def _as_matrix(e: EmbeddingVector | np.ndarray, embed_dim: int) -> np.ndarray:
    values = e.values if isinstance(e, EmbeddingVector) else np.asarray(e, dtype=np.float64)
    if values.ndim == 1:
        values = values[None, :]
    if values.shape[1] != embed_dim:
        raise ContractViolation(
            f"embedding dimension {values.shape[1]} does not match model dimension {embed_dim}"
        )
    return values


def detector_forward(params: ModelParams, e: EmbeddingVector | np.ndarray) -> float:
    """P(actionable) for one embedding."""
    return float(detector_forward_batch(params, _as_matrix(e, params.embed_dim))[0])


def detector_forward_batch(params: ModelParams, X: np.ndarray) -> np.ndarray:
    h = _hidden(params, _as_matrix(X, params.embed_dim))
    return _sigmoid(h @ params.w_det + params.b_det)


def reranker_forward(params: ModelParams, e: EmbeddingVector | np.ndarray) -> np.ndarray:
    """Class probabilities (false_warning, UTB, LTB, VTB) for one embedding."""
    return reranker_forward_batch(params, _as_matrix(e, params.embed_dim))[0]


def reranker_forward_batch(params: ModelParams, X: np.ndarray) -> np.ndarray:
    if params.stage is not Stage.FULL:
        raise ContractViolation("reranker head not trained yet (stage is detector_only)")
    h = _hidden(params, _as_matrix(X, params.embed_dim))
    return _softmax(h @ params.w_rr.T + params.b_rr)


# --- losses and gradients ---------------------------------------------------

_EPS = 1e-12


def detector_loss(
    params: ModelParams, X: np.ndarray, y: np.ndarray, sample_weights: np.ndarray
) -> float:
    p = detector_forward_batch(params, X)
    ll = y * np.log(np.clip(p, _EPS, 1.0)) + (1.0 - y) * np.log(np.clip(1.0 - p, _EPS, 1.0))
    return float(-(sample_weights * ll).mean())


def detector_gradients(
    params: ModelParams, X: np.ndarray, y: np.ndarray, sample_weights: np.ndarray
) -> dict[str, np.ndarray]:
    n = X.shape[0]
    h = _hidden(params, X)
    p = _sigmoid(h @ params.w_det + params.b_det)
    dz = sample_weights * (p - y) / n  # (N,)
    dh = np.outer(dz, params.w_det) * (1.0 - h * h)
    return {
        "w_det": h.T @ dz,
        "b_det": dz.sum(),
        "w1": dh.T @ X,
        "b1": dh.sum(axis=0),
    }


def reranker_loss(
    params: ModelParams, X: np.ndarray, y_idx: np.ndarray, sample_weights: np.ndarray
) -> float:
    probs = reranker_forward_batch(params, X)
    picked = probs[np.arange(len(y_idx)), y_idx]
    return float(-(sample_weights * np.log(np.clip(picked, _EPS, 1.0))).mean())


def reranker_gradients(
    params: ModelParams, X: np.ndarray, y_idx: np.ndarray, sample_weights: np.ndarray
) -> dict[str, np.ndarray]:
    n = X.shape[0]
    h = _hidden(params, X)
    probs = _softmax(h @ params.w_rr.T + params.b_rr)
    dlogits = probs.copy()
    dlogits[np.arange(n), y_idx] -= 1.0
    dlogits *= (sample_weights / n)[:, None]
    dh = (dlogits @ params.w_rr) * (1.0 - h * h)
    return {
        "w_rr": dlogits.T @ h,
        "b_rr": dlogits.sum(axis=0),
        "w1": dh.T @ X,
        "b1": dh.sum(axis=0),
    }


# --- training ---------------------------------------------------------------


@dataclass
class TrainingRun:
    params: ModelParams
    loss_trace: list[float] = field(default_factory=list)


def _stack(dataset: Sequence[tuple[EmbeddingVector, Any]]) -> tuple[np.ndarray, list[Any]]:
    if not dataset:
        raise TrainingError("empty training dataset")
    X = np.stack([e.values for e, _ in dataset]).astype(np.float64)
    return X, [label for _, label in dataset]


def _binary_weights(y: np.ndarray, weighting: str) -> np.ndarray:
    if weighting == "none":
        return np.ones(len(y))
    n = len(y)
    n_pos = int(y.sum())
    w = np.empty(n)
    w[y == 1] = n / (2.0 * n_pos)
    w[y == 0] = n / (2.0 * (n - n_pos))
    return w


def _multiclass_weights(y_idx: np.ndarray, weighting: str, n_classes: int = 4) -> np.ndarray:
    if weighting == "none":
        return np.ones(len(y_idx))
    n = len(y_idx)
    counts = np.bincount(y_idx, minlength=n_classes)
    per_class = np.zeros(n_classes)
    for c in range(n_classes):
        if counts[c] == 0:
            logger.warning(
                "class %s absent from reranker training data; weighting it 0",
                CLASS_ORDER[c].value,
            )
        else:
            per_class[c] = n / (n_classes * counts[c])
    return per_class[y_idx]


def _descend(
    params: ModelParams,
    X: np.ndarray,
    y: np.ndarray,
    weights: np.ndarray,
    cfg: TrainingConfig,
    loss_fn,
    grad_fn,
    updated_fields: tuple[str, ...],
    shuffle_rng: np.random.Generator,
) -> list[float]:
    n = X.shape[0]
    losses: list[float] = []
    for _ in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            grads = grad_fn(params, X[batch], y[batch], weights[batch])
            for name in updated_fields:
                if name == "b_det":
                    params.b_det -= cfg.learning_rate * grads[name]
                else:
                    getattr(params, name)[...] -= cfg.learning_rate * grads[name]
        losses.append(loss_fn(params, X, y, weights))
        if len(losses) >= 2 and abs(losses[-2] - losses[-1]) < cfg.convergence_tol:
            break
    return losses


def train_detector(
    dataset: Sequence[tuple[EmbeddingVector, int]],
    cfg: TrainingConfig | None = None,
    hidden_dim: int = DEFAULT_HIDDEN_DIM,
) -> TrainingRun:
    """Fit the warm-up detector on binary actionable/false labels."""
    cfg = cfg or TrainingConfig()
    X, labels = _stack(dataset)
    y = np.asarray([int(bool(v)) for v in labels], dtype=np.float64)
    if y.min() == y.max():
        raise TrainingError(
            "detector training needs both actionable and false examples; "
            f"got a single class ({'positive' if y.min() == 1 else 'negative'} only)"
        )
    weights = _binary_weights(y, cfg.class_weighting)
    params = init_detector_params(X.shape[1], hidden_dim, cfg.seed)
    losses = _descend(
        params,
        X,
        y,
        weights,
        cfg,
        detector_loss,
        detector_gradients,
        ("w1", "b1", "w_det", "b_det"),
        np.random.default_rng([cfg.seed, 1]),
    )
    return TrainingRun(params=params, loss_trace=losses)


def warm_start_reranker(params: ModelParams) -> ModelParams:
    """Attach a fresh reranker head to a trained detector body.

    The body and detector head are copied verbatim, so detector outputs are
    unchanged by the warm start itself.
    """
    if params.stage is not Stage.DETECTOR_ONLY:
        raise ContractViolation("warm start expects detector-only params")
    rng = np.random.default_rng([params.seed, 2])
    out = params.copy()
    out.stage = Stage.FULL
    out.w_rr = rng.uniform(-_WARM_HEAD_SCALE, _WARM_HEAD_SCALE, (4, params.hidden_dim))
    out.b_rr = rng.uniform(-_WARM_HEAD_SCALE, _WARM_HEAD_SCALE, 4)
    return out


def init_full_params(
    embed_dim: int, hidden_dim: int = DEFAULT_HIDDEN_DIM, seed: int = 0
) -> ModelParams:
    """Randomly initialized full model: the no-warm-start ablation."""
    return warm_start_reranker(init_detector_params(embed_dim, hidden_dim, seed))


def train_reranker(
    dataset: Sequence[tuple[EmbeddingVector, WeakLabelClass]],
    params: ModelParams,
    cfg: TrainingConfig | None = None,
) -> TrainingRun:
    """Fine-tune body and reranker head on 4-class weak labels."""
    cfg = cfg or TrainingConfig()
    if params.stage is not Stage.FULL:
        raise ContractViolation("train_reranker expects full-stage params (run warm start first)")
    X, labels = _stack(dataset)
    y_idx = np.asarray([CLASS_ORDER.index(lbl) for lbl in labels], dtype=np.int64)
    weights = _multiclass_weights(y_idx, cfg.class_weighting)
    out = params.copy()
    losses = _descend(
        out,
        X,
        y_idx,
        weights,
        cfg,
        reranker_loss,
        reranker_gradients,
        ("w1", "b1", "w_rr", "b_rr"),
        np.random.default_rng([cfg.seed, 3]),
    )
    return TrainingRun(params=out, loss_trace=losses)


# --- ranking ----------------------------------------------------------------


@dataclass(frozen=True)
class Prediction:
    detector_prob: float
    class_probs: tuple[float, float, float, float]
    predicted_class: WeakLabelClass
    score: float


@dataclass(frozen=True)
class RankedWarning:
    warning: Warning
    prediction: Prediction

    @property
    def band(self) -> str:
        if self.prediction.predicted_class is WeakLabelClass.VTB:
            return "red"
        if self.prediction.predicted_class is WeakLabelClass.LTB:
            return "orange"
        return "none"


def rank_score(class_probs: Sequence[float]) -> tuple[WeakLabelClass, float]:
    """Triage score from reranker probabilities.

    The predicted class's base score (0/1/2/3) is raised by its probability
    for the three actionable classes and lowered by it for false warnings,
    so predicted-class order always dominates the ranking. Ties break toward
    the higher class.
    """
    probs = np.asarray(class_probs, dtype=np.float64)
    if probs.shape != (4,):
        raise ContractViolation("rank_score expects exactly four class probabilities")
    if np.any(probs < -1e-9) or np.any(probs > 1.0 + 1e-9):
        raise ContractViolation("class probabilities must lie in [0, 1]")
    if abs(probs.sum() - 1.0) > 1e-6:
        raise ContractViolation("class probabilities must sum to 1")
    idx = 3 - int(np.argmax(probs[::-1]))
    p = float(probs[idx])
    score = idx + p if idx >= 1 else idx - p
    return CLASS_ORDER[idx], float(score)


def predict(params: ModelParams, e: EmbeddingVector | np.ndarray) -> Prediction:
    det = detector_forward(params, e)
    probs = reranker_forward(params, e)
    cls, score = rank_score(probs)
    return Prediction(
        detector_prob=det,
        class_probs=tuple(float(v) for v in probs),
        predicted_class=cls,
        score=score,
    )


def rank(
    warnings: Sequence[Warning],
    snapshot: SourceSnapshot | None,
    params: ModelParams,
    code_lines_by_id: dict[str, list[str]] | None = None,
) -> list[RankedWarning]:
    """Encode, score, and order warnings by descending triage score.

    Stable on exact score ties (input order preserved).
    """
    if params.stage is not Stage.FULL:
        raise ContractViolation("ranking requires a full-stage model")
    ranked = []
    for w in warnings:
        lines = code_lines_by_id.get(w.id) if code_lines_by_id else None
        e = embed(channels_for(w, snapshot, lines), params.embed_dim)
        ranked.append(RankedWarning(warning=w, prediction=predict(params, e)))
    return sorted(ranked, key=lambda r: -r.prediction.score)


# --- persistence --------------------------------------------------------------


def model_to_json(params: ModelParams, training_metadata: dict[str, Any] | None = None) -> str:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "embed_dim": params.embed_dim,
        "hidden_dim": params.hidden_dim,
        "class_order": [c.value for c in CLASS_ORDER],
        "seed": params.seed,
        "stage": params.stage.value,
        "weights": {
            "w1": params.w1.tolist(),
            "b1": params.b1.tolist(),
            "w_det": params.w_det.tolist(),
            "b_det": float(params.b_det),
            "w_rr": None if params.w_rr is None else params.w_rr.tolist(),
            "b_rr": None if params.b_rr is None else params.b_rr.tolist(),
        },
        "training_metadata": training_metadata or {},
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def save_model(
    params: ModelParams, path: str | Path, training_metadata: dict[str, Any] | None = None
) -> None:
    Path(path).write_text(model_to_json(params, training_metadata), encoding="utf-8")


def model_from_json(text: str) -> tuple[ModelParams, dict[str, Any]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc.msg}") from None
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format_version {doc.get('format_version')!r}")
    if doc.get("class_order") != [c.value for c in CLASS_ORDER]:
        raise ModelFormatError("model class_order does not match this package's class order")
    weights = doc["weights"]
    try:
        stage = Stage(doc["stage"])
        params = ModelParams(
            embed_dim=int(doc["embed_dim"]),
            hidden_dim=int(doc["hidden_dim"]),
            seed=int(doc["seed"]),
            stage=stage,
            w1=np.asarray(weights["w1"], dtype=np.float64),
            b1=np.asarray(weights["b1"], dtype=np.float64),
            w_det=np.asarray(weights["w_det"], dtype=np.float64),
            b_det=float(weights["b_det"]),
            w_rr=None if weights.get("w_rr") is None else np.asarray(weights["w_rr"], dtype=np.float64),
            b_rr=None if weights.get("b_rr") is None else np.asarray(weights["b_rr"], dtype=np.float64),
        )
    except (KeyError, ValueError, ContractViolation) as exc:
        raise ModelFormatError(f"model file failed validation: {exc}") from None
    if params.b1.shape != (params.hidden_dim,) or params.w_det.shape != (params.hidden_dim,):
        raise ModelFormatError("model weight shapes do not match declared dimensions")
    if params.w_rr is not None and params.w_rr.shape != (4, params.hidden_dim):
        raise ModelFormatError("reranker head shape does not match declared dimensions")
    return params, doc.get("training_metadata", {})


def load_model(path: str | Path) -> tuple[ModelParams, dict[str, Any]]:
    return model_from_json(Path(path).read_text(encoding="utf-8"))
