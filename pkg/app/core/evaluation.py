"""Cross-validation and held-out evaluation in per-example correct-count format."""

import numpy as np
from pydantic import BaseModel, Field
from scipy.stats import binomtest
from sklearn.model_selection import KFold

from app.core.corpus import CorpusExample
from app.core.exceptions import TooFewExamplesError
from app.core.extractor import ExtractionModel, ExtractionTrainer, TrainConfig
from app.core.intent import N_BUCKETS, N_GOALS, N_SLOTS, IntentSpec, score_prediction
from app.utils.logger import get_logger

logger = get_logger(__name__)

SIGNIFICANCE = 0.01


class MetricSummary(BaseModel):
    mean: float
    std: float


class ScoreSummary(BaseModel):
    """Mean correct goals (of 6) and constraints (of 8) plus slot-level accuracies."""

    n_examples: int
    mean_goals_correct: float
    mean_constraints_correct: float
    goal_slot_accuracy: float
    constraint_slot_accuracy: float


class FoldReport(ScoreSummary):
    fold: int
    n_train: int
    test_indices: list[int]


class CrossValidationReport(BaseModel):
    folds: list[FoldReport]
    summary: dict[str, MetricSummary]
    config: TrainConfig


class HoldoutReport(ScoreSummary):
    null_baseline_accuracy: float
    goal_chance_accuracy: float = 1.0 / N_BUCKETS
    constraint_p_value: float
    goal_p_value: float
    beats_null_baseline: bool
    beats_goal_chance: bool


class BaselineComparison(BaseModel):
    successes: int = Field(..., ge=0)
    trials: int = Field(..., ge=0)
    p_value: float


def summarize_scores(predictions: list[IntentSpec], gold: list[CorpusExample]) -> ScoreSummary:
    scores = [score_prediction(p, g.intent) for p, g in zip(predictions, gold)]
    goals = np.array([s.goals_correct for s in scores], dtype=float)
    constraints = np.array([s.constraints_correct for s in scores], dtype=float)
    return ScoreSummary(
        n_examples=len(scores),
        mean_goals_correct=float(goals.mean()),
        mean_constraints_correct=float(constraints.mean()),
        goal_slot_accuracy=float(goals.mean() / N_GOALS),
        constraint_slot_accuracy=float(constraints.mean() / N_SLOTS),
    )


def kfold_evaluate(
    corpus: list[CorpusExample],
    config: TrainConfig,
    pretrain: list[CorpusExample] | None = None,
) -> CrossValidationReport:
    """K-fold cross-validation with a seeded shuffled split.

    Each example is held out exactly once; every fold trains a fresh model
    (after the optional pretraining corpus) and scores its held-out fold.

    Raises:
        TooFewExamplesError: If the corpus has fewer examples than folds
    """
    if len(corpus) < config.folds:
        raise TooFewExamplesError(
            f"{len(corpus)} examples cannot be split into {config.folds} folds"
        )

    # Seeded shuffled split
    splitter = KFold(n_splits=config.folds, shuffle=True, random_state=config.seed)
    trainer = ExtractionTrainer(config)
    folds = []
    for fold, (train_idx, test_idx) in enumerate(splitter.split(np.arange(len(corpus)))):
        # Fresh model per fold
        model = trainer.train([corpus[i] for i in train_idx], pretrain)
        held_out = [corpus[i] for i in test_idx]
        summary = summarize_scores(model.predict_batch(held_out), held_out)
        folds.append(
            FoldReport(
                fold=fold,
                n_train=len(train_idx),
                test_indices=[int(i) for i in test_idx],
                **summary.model_dump(),
            )
        )
        logger.info(
            f"Fold {fold}: goals {summary.mean_goals_correct:.3f}/6, "
            f"constraints {summary.mean_constraints_correct:.3f}/8"
        )

    # Aggregate across folds
    metrics = {}
    for name in (
        "mean_goals_correct",
        "mean_constraints_correct",
        "goal_slot_accuracy",
        "constraint_slot_accuracy",
    ):
        values = np.array([getattr(f, name) for f in folds])
        metrics[name] = MetricSummary(mean=float(values.mean()), std=float(values.std()))
    return CrossValidationReport(folds=folds, summary=metrics, config=config)


def compare_to_baseline(successes: int, trials: int, baseline_rate: float) -> BaselineComparison:
    """One-sided binomial test that the success rate exceeds ``baseline_rate``."""
    result = binomtest(successes, trials, baseline_rate, alternative="greater")
    return BaselineComparison(successes=successes, trials=trials, p_value=float(result.pvalue))


def null_baseline_accuracy(examples: list[CorpusExample]) -> float:
    """Constraint slot accuracy of predicting Null in every slot."""
    nulls = sum(1 for e in examples for c in e.constraints if c is None)
    return nulls / (N_SLOTS * len(examples))


def evaluate_holdout(model: ExtractionModel, examples: list[CorpusExample]) -> HoldoutReport:
    """Score a trained model on held-out examples against the trivial baselines.

    Constraint slot accuracy is tested against the all-Null baseline and goal
    bucket accuracy against 20% chance (one-sided binomial tests).

    Raises:
        TooFewExamplesError: If there are no examples
    """
    if not examples:
        raise TooFewExamplesError("Held-out evaluation needs at least one example")

    predictions = model.predict_batch(examples)
    summary = summarize_scores(predictions, examples)
    scores = [score_prediction(p, e.intent) for p, e in zip(predictions, examples)]
    baseline = null_baseline_accuracy(examples)
    chance = 1.0 / N_BUCKETS

    constraint_test = compare_to_baseline(
        sum(s.constraints_correct for s in scores), N_SLOTS * len(examples), baseline
    )
    goal_test = compare_to_baseline(
        sum(s.goals_correct for s in scores), N_GOALS * len(examples), chance
    )
    logger.info(
        f"Holdout: constraint slot accuracy {summary.constraint_slot_accuracy:.3f} "
        f"(null baseline {baseline:.3f}, p={constraint_test.p_value:.2e}); "
        f"goal accuracy {summary.goal_slot_accuracy:.3f} (p={goal_test.p_value:.2e})"
    )
    return HoldoutReport(
        **summary.model_dump(),
        null_baseline_accuracy=baseline,
        goal_chance_accuracy=chance,
        constraint_p_value=constraint_test.p_value,
        goal_p_value=goal_test.p_value,
        beats_null_baseline=constraint_test.p_value < SIGNIFICANCE,
        beats_goal_chance=goal_test.p_value < SIGNIFICANCE,
    )
