"""Multi-head extraction model: six goal heads and eight constraint heads.

Every head is an affine map over a shared feature vector followed by a softmax.
Goal heads predict one of five value buckets; constraint heads each predict a
label from the constraint label space (Null included). Goal and constraint
heads are trained separately.
"""

import json
import math
from enum import StrEnum
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import softmax

from app.config import get_settings
from app.core.corpus import CorpusExample
from app.core.exceptions import DimensionMismatchError, DivergedLossError, EmptyCorpusError
from app.core.features import feature_dim, featurize, featurize_batch
from app.core.intent import (
    BUCKET_MIDPOINTS,
    N_BUCKETS,
    N_GOALS,
    N_LABELS,
    N_SLOTS,
    NULL_LABEL,
    GoalAssignment,
    GoalId,
    IntentSpec,
    constraint_of,
)
from app.core.losses import AnnealSchedule, anneal, constraint_loss_grad, goal_loss_grad
from app.utils.logger import LoggerMixin, get_logger

logger = get_logger(__name__)

MODEL_FORMAT_VERSION = 1
PARAMETER_NAMES = ("goal_W", "goal_b", "con_W", "con_b")


class Task(StrEnum):
    GOALS = "goals"
    CONSTRAINTS = "constraints"
    BOTH = "both"


class TrainConfig(BaseModel):
    """Training hyperparameters.

    ``epochs``, ``batch_size`` and ``learning_rate`` left unset take the
    per-head defaults from settings (constraints 10 epochs / batch 16, goals
    25 epochs / batch 8).
    """

    task: Task = Task.BOTH
    epochs: int | None = Field(default=None, ge=1)
    batch_size: int | None = Field(default=None, ge=1)
    learning_rate: float | None = Field(default=None, gt=0.0)
    momentum: float = Field(default=0.0, ge=0.0, lt=1.0)
    alpha: float = Field(default=0.5, ge=0.0, le=1.0)
    anneal_k: float = Field(default=10.0, gt=0.0)
    anneal_mid: float = Field(default=0.5, gt=0.0, lt=1.0)
    seed: int = 0
    folds: int = Field(default=10, ge=2)
    feature_dim: int = Field(default=2048, ge=1)
    init_scale: float = Field(default=0.01, ge=0.0)

    @classmethod
    def from_settings(cls, **overrides) -> "TrainConfig":
        """Config seeded from settings; ``None`` overrides are ignored."""
        settings = get_settings()
        values = {
            "momentum": settings.momentum,
            "alpha": settings.goal_alpha,
            "anneal_k": settings.anneal_k,
            "anneal_mid": settings.anneal_mid,
            "seed": settings.seed,
            "folds": settings.folds,
            "feature_dim": settings.feature_dim,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def schedule_for(self, head: Task) -> tuple[int, int, float]:
        """(epochs, batch size, learning rate) for the goal or constraint heads."""
        settings = get_settings()
        if head == Task.GOALS:
            defaults = (
                settings.goal_epochs,
                settings.goal_batch_size,
                settings.goal_learning_rate,
            )
        else:
            defaults = (
                settings.constraint_epochs,
                settings.constraint_batch_size,
                settings.constraint_learning_rate,
            )
        return (
            self.epochs or defaults[0],
            self.batch_size or defaults[1],
            self.learning_rate or defaults[2],
        )


class SlotDistributions(BaseModel):
    """Per-slot probability rows: goals (6 x 5) and constraints (8 x labels)."""

    model_config = {"arbitrary_types_allowed": True}

    goals: np.ndarray
    constraints: np.ndarray


class ExtractionModel:
    """Parameters of all fourteen heads plus the config that produced them."""

    def __init__(
        self,
        config: TrainConfig,
        goal_W: np.ndarray,
        goal_b: np.ndarray,
        con_W: np.ndarray,
        con_b: np.ndarray,
        history: list[dict] | None = None,
    ):
        self.config = config
        self.goal_W = goal_W
        self.goal_b = goal_b
        self.con_W = con_W
        self.con_b = con_b
        self.history = history or []

    @property
    def n_features(self) -> int:
        return self.goal_W.shape[-1]

    @classmethod
    def initialize(cls, config: TrainConfig) -> "ExtractionModel":
        """Small seeded Gaussian weights (distinct per head) and zero biases."""
        rng = np.random.default_rng(config.seed)
        dim = feature_dim(config.feature_dim)
        return cls(
            config=config,
            goal_W=rng.normal(0.0, config.init_scale, size=(N_GOALS, N_BUCKETS, dim)),
            goal_b=np.zeros((N_GOALS, N_BUCKETS)),
            con_W=rng.normal(0.0, config.init_scale, size=(N_SLOTS, N_LABELS, dim)),
            con_b=np.zeros((N_SLOTS, N_LABELS)),
        )

    @classmethod
    def zeros(cls, config: TrainConfig) -> "ExtractionModel":
        dim = feature_dim(config.feature_dim)
        return cls(
            config=config,
            goal_W=np.zeros((N_GOALS, N_BUCKETS, dim)),
            goal_b=np.zeros((N_GOALS, N_BUCKETS)),
            con_W=np.zeros((N_SLOTS, N_LABELS, dim)),
            con_b=np.zeros((N_SLOTS, N_LABELS)),
        )

    def parameters(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAMETER_NAMES}

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.parameters().values())

    # ============== Inference ==============

    def _check_dim(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=float)
        if features.shape[-1] != self.n_features:
            raise DimensionMismatchError(
                f"Feature dimension {features.shape[-1]} does not match model dimension "
                f"{self.n_features}"
            )
        return features

    def goal_logits(self, features: np.ndarray) -> np.ndarray:
        """Logits of shape (n, 6, 5) for a feature matrix (n, F)."""
        features = self._check_dim(features)
        return _affine(features, self.goal_W, self.goal_b)

    def constraint_logits(self, features: np.ndarray) -> np.ndarray:
        """Logits of shape (n, 8, labels) for a feature matrix (n, F)."""
        features = self._check_dim(features)
        return _affine(features, self.con_W, self.con_b)

    def forward(self, features: np.ndarray) -> SlotDistributions:
        """Slot distributions for a single feature vector.

        Raises:
            DimensionMismatchError: If the vector length differs from the model's
        """
        row = self._check_dim(features)[None, :]
        return SlotDistributions(
            goals=softmax(self.goal_logits(row)[0], axis=-1),
            constraints=softmax(self.constraint_logits(row)[0], axis=-1),
        )

    def predict_features(self, features: np.ndarray) -> IntentSpec:
        return decode(self.forward(features))

    def predict(
        self, text: str, selections: dict[str, int], map_id: int | None = None
    ) -> IntentSpec:
        fv = featurize(text, selections, self.config.feature_dim, map_id)
        return self.predict_features(fv.values)

    def predict_batch(self, examples: list[CorpusExample]) -> list[IntentSpec]:
        features = _features(examples, self.config.feature_dim)
        goal_probs = softmax(self.goal_logits(features), axis=-1)
        con_probs = softmax(self.constraint_logits(features), axis=-1)
        return [
            decode(SlotDistributions(goals=g, constraints=c))
            for g, c in zip(goal_probs, con_probs)
        ]

    # ============== Persistence ==============

    def save(self, path: str | Path) -> None:
        """Write a JSON header line followed by the parameter arrays in .npy format."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = {
            "format_version": MODEL_FORMAT_VERSION,
            "config": self.config.model_dump(mode="json"),
            "history": self.history,
            "parameters": list(PARAMETER_NAMES),
        }
        with path.open("wb") as f:
            f.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
            for name in PARAMETER_NAMES:
                np.save(f, getattr(self, name), allow_pickle=False)
        logger.info(f"Saved model to {path}")

    @classmethod
    def load(cls, path: str | Path) -> "ExtractionModel":
        path = Path(path)
        with path.open("rb") as f:
            header = json.loads(f.readline().decode("utf-8"))
            if header.get("format_version") != MODEL_FORMAT_VERSION:
                raise ValueError(f"Unsupported model format_version: {header.get('format_version')}")
            arrays = {name: np.load(f, allow_pickle=False) for name in header["parameters"]}
        logger.info(f"Loaded model from {path}")
        return cls(config=TrainConfig(**header["config"]), history=header["history"], **arrays)


def decode(dists: SlotDistributions) -> IntentSpec:
    """Argmax goal buckets and de-duplicated constraint labels.

    Constraint heads are read in slot order; a head whose best label was already
    taken falls back to its best unused label. Null may repeat.
    """
    goals = [
        GoalAssignment(goal_id=goal_id, value=BUCKET_MIDPOINTS[int(np.argmax(row))])
        for goal_id, row in zip(GoalId, dists.goals)
    ]
    used: set[int] = set()
    constraints = []
    for row in dists.constraints:
        for label in np.argsort(-row, kind="stable"):
            label = int(label)
            if label == NULL_LABEL or label not in used:
                break
        if label != NULL_LABEL:
            used.add(label)
        constraints.append(constraint_of(label))
    return IntentSpec(goals=goals, constraints=constraints)


def _affine(features: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-head logits (n, heads, classes) from features (n, F) and weights (heads, classes, F)."""
    heads, classes, dim = W.shape
    return (features @ W.reshape(heads * classes, dim).T).reshape(-1, heads, classes) + b


def _features(examples: list[CorpusExample], dim: int) -> np.ndarray:
    return featurize_batch(
        [e.text for e in examples],
        [e.selections for e in examples],
        [e.map_id for e in examples],
        dim,
    )


def goal_targets(examples: list[CorpusExample]) -> np.ndarray:
    return np.array([e.intent.goal_buckets() for e in examples], dtype=int)


def constraint_targets(examples: list[CorpusExample]) -> np.ndarray:
    return np.array([e.intent.constraint_labels() for e in examples], dtype=int)


def goal_batch_gradients(
    model: ExtractionModel, features: np.ndarray, targets: np.ndarray, alpha: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean goal loss over a batch and its gradients w.r.t. goal_W and goal_b."""
    logits = model.goal_logits(features)
    losses = []
    grads = np.empty_like(logits)
    for n, (row, target) in enumerate(zip(logits, targets)):
        loss, grads[n] = goal_loss_grad(row, list(target), alpha)
        losses.append(loss)
    count = len(features)
    return (
        math.fsum(losses) / count,
        np.tensordot(grads, features, axes=([0], [0])) / count,
        grads.sum(axis=0) / count,
    )


def constraint_batch_gradients(
    model: ExtractionModel, features: np.ndarray, targets: np.ndarray, t_m: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean constraint loss over a batch and its gradients w.r.t. con_W and con_b.

    Each example's best alignment is computed once and held fixed.
    """
    logits = model.constraint_logits(features)
    losses = []
    grads = np.empty_like(logits)
    for n, (row, target) in enumerate(zip(logits, targets)):
        loss, grads[n], _ = constraint_loss_grad(row, list(target), t_m)
        losses.append(loss)
    count = len(features)
    return (
        math.fsum(losses) / count,
        np.tensordot(grads, features, axes=([0], [0])) / count,
        grads.sum(axis=0) / count,
    )


class ExtractionTrainer(LoggerMixin):
    """Minibatch gradient descent over goal and/or constraint heads."""

    def __init__(self, config: TrainConfig | None = None):
        self.config = config or TrainConfig.from_settings()

    def train(
        self,
        corpus: list[CorpusExample],
        pretrain: list[CorpusExample] | None = None,
    ) -> ExtractionModel:
        """Train a model, optionally pretraining on another corpus first.

        Args:
            corpus: Main training corpus
            pretrain: Corpus for a first pass (e.g. synthetic data)

        Returns:
            The trained model; ``model.history`` holds per-epoch mean losses

        Raises:
            EmptyCorpusError: If ``corpus`` is empty
            DivergedLossError: If a loss becomes non-finite
        """
        if not corpus:
            raise EmptyCorpusError("Cannot train on an empty corpus")

        config = self.config
        model = ExtractionModel.initialize(config)

        # Featurize each stage once
        stages = [("pretrain", pretrain)] if pretrain else []
        stages.append(("main", corpus))
        data = [
            (name, _features(examples, config.feature_dim), examples) for name, examples in stages
        ]

        # Pretraining stage first, then the main corpus
        if config.task in (Task.GOALS, Task.BOTH):
            self._train_goals(model, data)
        if config.task in (Task.CONSTRAINTS, Task.BOTH):
            self._train_constraints(model, data)

        self.logger.info(
            f"Training finished: task={config.task}, examples={len(corpus)}, "
            f"pretrain={len(pretrain or [])}"
        )
        return model

    def _batches(self, n: int, batch_size: int, rng: np.random.Generator) -> list[np.ndarray]:
        order = rng.permutation(n)
        return [order[i : i + batch_size] for i in range(0, n, batch_size)]

    def _record(
        self, model: ExtractionModel, stage: str, head: Task, epoch: int, mean_loss: float
    ) -> None:
        if not math.isfinite(mean_loss):
            raise DivergedLossError(
                f"{head} loss diverged in {stage} epoch {epoch}; lower the learning rate"
            )
        model.history.append(
            {"stage": stage, "head": head.value, "epoch": epoch, "mean_loss": mean_loss}
        )
        self.logger.info(f"[{stage}] {head} epoch {epoch}: mean loss {mean_loss:.6f}")

    def _train_goals(self, model: ExtractionModel, data: list) -> None:
        epochs, batch_size, lr = self.config.schedule_for(Task.GOALS)
        rng = np.random.default_rng([self.config.seed, 1])
        velocity_W = np.zeros_like(model.goal_W)
        velocity_b = np.zeros_like(model.goal_b)
        for stage, features, examples in data:
            targets = goal_targets(examples)
            for epoch in range(1, epochs + 1):
                losses = []
                for batch in self._batches(len(examples), batch_size, rng):
                    # Momentum SGD step
                    loss, grad_W, grad_b = goal_batch_gradients(
                        model, features[batch], targets[batch], self.config.alpha
                    )
                    if not math.isfinite(loss):
                        raise DivergedLossError(f"goal loss diverged in {stage} epoch {epoch}")
                    velocity_W = self.config.momentum * velocity_W - lr * grad_W
                    velocity_b = self.config.momentum * velocity_b - lr * grad_b
                    model.goal_W += velocity_W
                    model.goal_b += velocity_b
                    losses.append(loss * len(batch))
                self._record(model, stage, Task.GOALS, epoch, math.fsum(losses) / len(examples))

    def _train_constraints(self, model: ExtractionModel, data: list) -> None:
        epochs, batch_size, lr = self.config.schedule_for(Task.CONSTRAINTS)
        rng = np.random.default_rng([self.config.seed, 2])
        total_steps = sum(
            epochs * math.ceil(len(examples) / batch_size) for _, _, examples in data
        )
        schedule = AnnealSchedule(
            total_steps=max(total_steps - 1, 1), k=self.config.anneal_k, m=self.config.anneal_mid
        )
        velocity_W = np.zeros_like(model.con_W)
        velocity_b = np.zeros_like(model.con_b)
        step = 0
        for stage, features, examples in data:
            targets = constraint_targets(examples)
            for epoch in range(1, epochs + 1):
                losses = []
                for batch in self._batches(len(examples), batch_size, rng):
                    # Temperature follows the global step across stages
                    t_m = anneal(min(step, schedule.total_steps), schedule)
                    loss, grad_W, grad_b = constraint_batch_gradients(
                        model, features[batch], targets[batch], t_m
                    )
                    if not math.isfinite(loss):
                        raise DivergedLossError(
                            f"constraint loss diverged in {stage} epoch {epoch}"
                        )
                    velocity_W = self.config.momentum * velocity_W - lr * grad_W
                    velocity_b = self.config.momentum * velocity_b - lr * grad_b
                    model.con_W += velocity_W
                    model.con_b += velocity_b
                    losses.append(loss * len(batch))
                    step += 1
                self._record(
                    model, stage, Task.CONSTRAINTS, epoch, math.fsum(losses) / len(examples)
                )
