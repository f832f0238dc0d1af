"""Goal and constraint losses with analytic gradients.

Goal heads are ordinal: a blend of cross entropy and the squared error of the
expected bucket index. Constraint heads predict an unordered set, so their loss
blends default-order cross entropy with order-agnostic cross entropy (OaXE):
cross entropy under the target ordering that the Hungarian algorithm finds
cheapest. The blend weight is annealed logistically from 1 to 0 during training.

Distributions are ``(slots, classes)`` arrays whose rows sum to 1; targets are
class indices, one per slot.
"""

import math

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.optimize import linear_sum_assignment
from scipy.special import expit, softmax

from app.core.exceptions import NonSquareError

PROB_FLOOR = 1e-12


class Alignment(BaseModel):
    """Target ``i`` is assigned to slot ``permutation[i]``."""

    permutation: list[int]
    cost: float

    @model_validator(mode="after")
    def _check_bijection(self) -> "Alignment":
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise ValueError("permutation must be a bijection")
        return self

    def slot_targets(self, targets: list[int]) -> list[int]:
        """Targets reordered so that entry ``j`` is the target aligned to slot ``j``."""
        aligned = [0] * len(targets)
        for i, slot in enumerate(self.permutation):
            aligned[slot] = targets[i]
        return aligned


class AnnealSchedule(BaseModel):
    total_steps: int = Field(..., ge=1)
    k: float = Field(default=10.0, gt=0.0)
    m: float = Field(default=0.5, gt=0.0, lt=1.0)


def neg_log(p: np.ndarray) -> np.ndarray:
    return -np.log(np.clip(p, PROB_FLOOR, None))


def hungarian(cost: np.ndarray | list[list[float]]) -> Alignment:
    """Minimum-cost perfect assignment of rows to columns.

    Raises:
        NonSquareError: If the matrix is not n x n with n >= 1
    """
    matrix = np.asarray(cost, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise NonSquareError(f"Cost matrix must be square and non-empty, got {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Cost matrix entries must be finite")

    rows, cols = linear_sum_assignment(matrix)
    permutation = [int(c) for _, c in sorted(zip(rows, cols))]
    return Alignment(
        permutation=permutation,
        cost=math.fsum(matrix[i, j] for i, j in enumerate(permutation)),
    )


def default_ce(dists: np.ndarray, targets: list[int]) -> float:
    """Cross entropy with target ``i`` scored by slot ``i`` (summed over slots)."""
    dists = np.asarray(dists, dtype=float)
    return math.fsum(neg_log(dists[np.arange(len(targets)), targets]))


def oaxe_loss(dists: np.ndarray, targets: list[int]) -> tuple[float, Alignment]:
    """Order-agnostic cross entropy and the best alignment.

    ``cost[i][j] = -log p_j(target_i)``; the loss is the summed cost of the
    minimum-cost alignment.
    """
    dists = np.asarray(dists, dtype=float)
    cost = neg_log(dists[:, targets]).T
    alignment = hungarian(cost)
    identity = list(range(len(targets)))
    default = math.fsum(cost[i, i] for i in identity)
    if default < alignment.cost:
        # float ties inside the solver
        alignment = Alignment(permutation=identity, cost=default)
    return alignment.cost, alignment


def constraint_loss(
    dists: np.ndarray,
    targets: list[int],
    t_m: float,
    alignment: Alignment | None = None,
) -> float:
    """``t_m * CE + (1 - t_m) * OaXE``.

    A precomputed ``alignment`` is scored as given instead of being searched.
    """
    ce = default_ce(dists, targets)
    if alignment is None:
        oaxe, _ = oaxe_loss(dists, targets)
    else:
        oaxe = default_ce(dists, alignment.slot_targets(targets))
    return t_m * ce + (1.0 - t_m) * oaxe


def goal_loss(dists: np.ndarray, target_buckets: list[int], alpha: float) -> float:
    """``alpha * mean CE + (1 - alpha) * mean (E[bucket] - target)^2`` over goal slots."""
    dists = np.asarray(dists, dtype=float)
    targets = np.asarray(target_buckets)
    ce = float(np.mean(neg_log(dists[np.arange(len(targets)), targets])))
    expected = dists @ np.arange(dists.shape[1])
    mse = float(np.mean((expected - targets) ** 2))
    return alpha * ce + (1.0 - alpha) * mse


# ============== Gradients w.r.t. logits ==============


def goal_loss_grad(
    logits: np.ndarray, target_buckets: list[int], alpha: float
) -> tuple[float, np.ndarray]:
    """goal_loss of ``softmax(logits)`` and its gradient w.r.t. the logits."""
    probs = softmax(np.asarray(logits, dtype=float), axis=-1)
    n_slots, n_buckets = probs.shape
    targets = np.asarray(target_buckets)
    one_hot = np.eye(n_buckets)[targets]
    index = np.arange(n_buckets)
    expected = probs @ index

    # d/dz of E[bucket] is p * (index - E)
    ce_grad = probs - one_hot
    mse_grad = 2.0 * (expected - targets)[:, None] * probs * (index[None, :] - expected[:, None])
    grad = (alpha * ce_grad + (1.0 - alpha) * mse_grad) / n_slots
    return goal_loss(probs, target_buckets, alpha), grad


def constraint_loss_grad(
    logits: np.ndarray,
    targets: list[int],
    t_m: float,
    alignment: Alignment | None = None,
) -> tuple[float, np.ndarray, Alignment]:
    """constraint_loss of ``softmax(logits)`` and its gradient w.r.t. the logits.

    The alignment is held fixed when differentiating.
    """
    probs = softmax(np.asarray(logits, dtype=float), axis=-1)
    if alignment is None:
        _, alignment = oaxe_loss(probs, targets)
    # CE and OaXE both reduce to probs minus a one-hot target
    n_labels = probs.shape[1]
    default_targets = np.eye(n_labels)[targets]
    aligned_targets = np.eye(n_labels)[alignment.slot_targets(targets)]
    grad = probs - (t_m * default_targets + (1.0 - t_m) * aligned_targets)
    return constraint_loss(probs, targets, t_m, alignment), grad, alignment


def anneal(step: int, schedule: AnnealSchedule) -> float:
    """Logistic temperature rescaled to fall exactly from 1 at step 0 to 0 at the last step."""
    if not 0 <= step <= schedule.total_steps:
        raise ValueError(f"step {step} outside [0, {schedule.total_steps}]")

    def raw(x: float) -> float:
        return float(expit(-schedule.k * (x - schedule.m)))

    start, end = raw(0.0), raw(1.0)
    return (raw(step / schedule.total_steps) - end) / (start - end)
